//! Soft-margin SVM trained by sequential minimal optimization.
//!
//! The binary solver picks the maximal violating pair at every step and stops
//! once the pair's violation drops below the tolerance. Multiclass problems
//! are split into one binary machine per class pair and decided by voting.

use std::collections::{HashMap, VecDeque};
use std::io::{BufRead, Write};
use std::path::Path;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::features::FeatureSchema;

const TAU: f64 = 1e-12;
/// Margins closer to zero than this cast no vote.
pub const VOTE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Rbf { .. } => "rbf",
        }
    }

    fn gamma(&self) -> f64 {
        match *self {
            Kernel::Linear => 0.0,
            Kernel::Rbf { gamma } => gamma,
        }
    }
}

/// Kernel choice before the feature count is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "rbf" => Ok(KernelKind::Rbf),
            _ => Err(Error::config("kernel", format!("expected linear|rbf, got {s:?}"))),
        }
    }
}

impl KernelKind {
    /// Concrete kernel; RBF gamma defaults to `1 / dims`.
    pub fn resolve(self, gamma: Option<f64>, dims: usize) -> Kernel {
        match self {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf {
                gamma: gamma.unwrap_or(1.0 / dims.max(1) as f64),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub kernel: Kernel,
    pub c: f64,
    pub tolerance: f64,
    /// Upper bound on kernel-cache memory.
    pub cache_bytes: usize,
}

impl SvmParams {
    pub fn new(kernel: Kernel, c: f64) -> Self {
        SvmParams {
            kernel,
            c,
            tolerance: 1e-3,
            cache_bytes: 64 << 20,
        }
    }
}

/// Least-recently-used cache of rows of `Q[i][j] = y_i y_j K(x_i, x_j)`.
struct QCache<'a> {
    x: &'a [&'a [f64]],
    y: &'a [f64],
    kernel: Kernel,
    capacity: usize,
    rows: HashMap<usize, Rc<Vec<f64>>>,
    order: VecDeque<usize>,
}

impl<'a> QCache<'a> {
    fn new(x: &'a [&'a [f64]], y: &'a [f64], kernel: Kernel, cache_bytes: usize) -> Self {
        let row_bytes = 8 * x.len().max(1);
        QCache {
            x,
            y,
            kernel,
            capacity: (cache_bytes / row_bytes).max(2),
            rows: HashMap::new(),
            order: VecDeque::new(),
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = self.rows.get(&i) {
            let r = Rc::clone(r);
            if let Some(pos) = self.order.iter().position(|&k| k == i) {
                self.order.remove(pos);
            }
            self.order.push_back(i);
            return r;
        }
        let xi = self.x[i];
        let yi = self.y[i];
        let r: Rc<Vec<f64>> = Rc::new(
            self.x
                .iter()
                .zip(self.y)
                .map(|(xj, yj)| yi * yj * self.kernel.eval(xi, xj))
                .collect(),
        );
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        self.rows.insert(i, Rc::clone(&r));
        self.order.push_back(i);
        r
    }
}

/// Dual solution of one binary problem, labels in {+1, -1}.
struct DualSolution {
    alpha: Vec<f64>,
    rho: f64,
}

fn solve_binary(x: &[&[f64]], y: &[f64], params: &SvmParams) -> DualSolution {
    let l = x.len();
    let c = params.c;
    let mut alpha = vec![0.0; l];
    let mut grad = vec![-1.0; l];
    let mut cache = QCache::new(x, y, params.kernel, params.cache_bytes);
    let max_iter = (100 * l).max(10_000_000);
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    for _ in 0..max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        for t in 0..l {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tolerance {
            break;
        }

        let qi = cache.row(i);
        let qj = cache.row(j);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_ai, old_aj);
        if y[i] != y[j] {
            let quad = (qi[i] + qj[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qi[i] + qj[j] - 2.0 * qi[j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (dai, daj) = (ai - old_ai, aj - old_aj);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += qi[t] * dai + qj[t] * daj;
        }
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..l {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    DualSolution { alpha, rho }
}

/// One binary machine: `positive` wins when the decision value is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub positive: String,
    pub negative: String,
    /// Row indices of the support vectors in the training dataset.
    pub sv_indices: Vec<usize>,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &Kernel, x: &[f64]) -> f64 {
        let s: f64 = self
            .support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * kernel.eval(sv, x))
            .sum();
        s - self.rho
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub schema: FeatureSchema,
    /// Class names in lexicographic order.
    pub classes: Vec<String>,
    /// One machine per class pair `(a, b)` with `a < b`, in lexicographic
    /// pair order.
    pub machines: Vec<BinarySvm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMargin {
    pub positive: String,
    pub negative: String,
    pub value: f64,
}

pub fn train_svm(data: &LabeledDataset, params: &SvmParams) -> Result<SvmModel> {
    data.check_finite()?;
    let by = data.indices_by_class();
    if by.len() < 2 {
        return Err(Error::SingleClassDataset);
    }
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::config("c", format!("must be positive, got {}", params.c)));
    }
    let classes: Vec<String> = by.keys().map(|s| s.to_string()).collect();
    let mut machines = Vec::new();
    for (a, ia) in by.iter() {
        for (b, ib) in by.range::<str, _>((std::ops::Bound::Excluded(*a), std::ops::Bound::Unbounded)) {
            let mut idx: Vec<usize> = ia.iter().chain(ib.iter()).copied().collect();
            idx.sort_unstable();
            let x: Vec<&[f64]> = idx.iter().map(|&i| data.rows[i].values.as_slice()).collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if data.labels[i] == *a { 1.0 } else { -1.0 })
                .collect();
            let sol = solve_binary(&x, &y, params);
            let mut m = BinarySvm {
                positive: a.to_string(),
                negative: b.to_string(),
                sv_indices: Vec::new(),
                support_vectors: Vec::new(),
                coef: Vec::new(),
                rho: sol.rho,
            };
            for (t, &al) in sol.alpha.iter().enumerate() {
                if al > 0.0 {
                    m.sv_indices.push(idx[t]);
                    m.support_vectors.push(x[t].to_vec());
                    m.coef.push(al * y[t]);
                }
            }
            machines.push(m);
        }
    }
    Ok(SvmModel {
        kernel: params.kernel,
        c: params.c,
        schema: data.schema.clone(),
        classes,
        machines,
    })
}

impl SvmModel {
    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.schema.len() {
            return Err(Error::SchemaMismatch {
                expected: self.schema.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<PairMargin>> {
        self.check_len(x)?;
        Ok(self
            .machines
            .iter()
            .map(|m| PairMargin {
                positive: m.positive.clone(),
                negative: m.negative.clone(),
                value: m.decision(&self.kernel, x),
            })
            .collect())
    }

    /// One-vs-one vote. Ties go to the class with the larger summed absolute
    /// margin over the pairs it won, then to the lexicographically smaller
    /// name.
    pub fn predict(&self, x: &[f64]) -> Result<String> {
        let margins = self.decision_values(x)?;
        let mut votes = vec![0usize; self.classes.len()];
        let mut strength = vec![0.0f64; self.classes.len()];
        let pos = |name: &str| self.classes.iter().position(|c| c == name).expect("known class");
        for m in &margins {
            let winner = if m.value > VOTE_EPSILON {
                &m.positive
            } else if m.value < -VOTE_EPSILON {
                &m.negative
            } else {
                continue;
            };
            let w = pos(winner);
            votes[w] += 1;
            strength[w] += m.value.abs();
        }
        let mut best = 0;
        for c in 1..self.classes.len() {
            if votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]) {
                best = c;
            }
        }
        Ok(self.classes[best].clone())
    }

    /// Largest KKT violation of any training point, measured on `y f(x)`.
    pub fn max_kkt_violation(&self, data: &LabeledDataset) -> f64 {
        let mut worst = 0.0f64;
        for m in &self.machines {
            let alpha: HashMap<usize, f64> = m.sv_indices.iter().zip(&m.coef).map(|(&i, a)| (i, a.abs())).collect();
            for (i, label) in data.labels.iter().enumerate() {
                let y = if *label == m.positive {
                    1.0
                } else if *label == m.negative {
                    -1.0
                } else {
                    continue;
                };
                let yf = y * m.decision(&self.kernel, &data.rows[i].values);
                let a = alpha.get(&i).copied().unwrap_or(0.0);
                let v = if a <= 0.0 {
                    (1.0 - yf).max(0.0)
                } else if a >= self.c {
                    (yf - 1.0).max(0.0)
                } else {
                    (yf - 1.0).abs()
                };
                worst = worst.max(v);
            }
        }
        worst
    }

    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if *schema != self.schema {
            return Err(Error::SchemaMismatch {
                expected: self.schema.len(),
                got: schema.len(),
            });
        }
        Ok(())
    }
}

const MODEL_FORMAT: &str = "ulstyle-svm";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct MachineHeader {
    positive: String,
    negative: String,
    support_vectors: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    version: u32,
    kernel: String,
    gamma: f64,
    c: f64,
    schema: FeatureSchema,
    schema_hash: String,
    classes: Vec<String>,
    machines: Vec<MachineHeader>,
    checksum: String,
}

fn put(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

impl SvmModel {
    /// Binary section: gamma, C, then per machine rho, SV indices, SV
    /// values and coefficients, all as little-endian 8-byte words.
    fn payload(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        put(&mut buf, self.kernel.gamma());
        put(&mut buf, self.c);
        for m in &self.machines {
            put(&mut buf, m.rho);
            for &i in &m.sv_indices {
                buf.extend_from_slice(&(i as u64).to_le_bytes());
            }
            for sv in &m.support_vectors {
                for &v in sv {
                    put(&mut buf, v);
                }
            }
            for &a in &m.coef {
                put(&mut buf, a);
            }
        }
        buf
    }

    /// Writes a one-line JSON header followed by the binary section.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let payload = self.payload();
        let header = ModelHeader {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            kernel: self.kernel.name().into(),
            gamma: self.kernel.gamma(),
            c: self.c,
            schema: self.schema.clone(),
            schema_hash: self.schema.hash(),
            classes: self.classes.clone(),
            machines: self
                .machines
                .iter()
                .map(|m| MachineHeader {
                    positive: m.positive.clone(),
                    negative: m.negative.clone(),
                    support_vectors: m.coef.len(),
                })
                .collect(),
            checksum: hex::encode(Sha256::digest(&payload)),
        };
        let io = |e| Error::io("<svm model>", e);
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n").map_err(io)?;
        w.write_all(&payload).map_err(io)
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let io = |e| Error::io("<svm model>", e);
        let mut line = String::new();
        r.read_line(&mut line).map_err(io)?;
        let header: ModelHeader = serde_json::from_str(line.trim_end())?;
        if header.format != MODEL_FORMAT || header.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format {} v{}",
                header.format, header.version
            )));
        }
        if header.schema.hash() != header.schema_hash {
            return Err(Error::ModelFormat("schema hash mismatch".into()));
        }
        let mut payload = Vec::new();
        r.read_to_end(&mut payload).map_err(io)?;
        if hex::encode(Sha256::digest(&payload)) != header.checksum {
            return Err(Error::ModelFormat("checksum mismatch".into()));
        }
        let dims = header.schema.len();
        let expected: usize = 2 + header
            .machines
            .iter()
            .map(|m| 1 + m.support_vectors * (dims + 2))
            .sum::<usize>();
        if payload.len() != 8 * expected {
            return Err(Error::ModelFormat(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                8 * expected
            )));
        }
        let mut words = payload.chunks_exact(8).map(|c| {
            let mut b = [0u8; 8];
            b.copy_from_slice(c);
            b
        });
        let mut f = || f64::from_le_bytes(words.next().expect("length checked"));
        let gamma = f();
        let c = f();
        let kernel = match header.kernel.as_str() {
            "linear" => Kernel::Linear,
            "rbf" => Kernel::Rbf { gamma },
            k => return Err(Error::ModelFormat(format!("unknown kernel {k:?}"))),
        };
        let mut machines = Vec::new();
        for mh in header.machines {
            let n = mh.support_vectors;
            let rho = f();
            let sv_indices = (0..n).map(|_| f().to_bits() as usize).collect();
            let support_vectors = (0..n).map(|_| (0..dims).map(|_| f()).collect()).collect();
            let coef = (0..n).map(|_| f()).collect();
            machines.push(BinarySvm {
                positive: mh.positive,
                negative: mh.negative,
                sv_indices,
                support_vectors,
                coef,
                rho,
            });
        }
        Ok(SvmModel {
            kernel,
            c,
            schema: header.schema,
            classes: header.classes,
            machines,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        SvmModel::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureGroup, FeatureVector};

    /// Two-column dataset padded into the 4-dim TIMEX schema.
    fn points(pts: &[(f64, f64, &str)]) -> LabeledDataset {
        let rows = pts
            .iter()
            .enumerate()
            .map(|(i, &(a, b, _))| FeatureVector {
                doc_id: i.to_string(),
                values: vec![a, b, 0.0, 0.0],
            })
            .collect();
        let labels = pts.iter().map(|p| p.2.to_string()).collect();
        LabeledDataset::new(FeatureSchema::new(&[FeatureGroup::Timex]), rows, labels).unwrap()
    }

    fn accuracy(m: &SvmModel, d: &LabeledDataset) -> f64 {
        let hits = d
            .rows
            .iter()
            .zip(&d.labels)
            .filter(|(r, l)| m.predict(&r.values).unwrap() == **l)
            .count();
        hits as f64 / d.len() as f64
    }

    fn xor() -> LabeledDataset {
        points(&[(0.0, 0.0, "A"), (1.0, 1.0, "A"), (0.0, 1.0, "B"), (1.0, 0.0, "B")])
    }

    #[test]
    fn separable_blobs_linear() {
        let d = points(&[
            (2.0, 2.0, "A"),
            (2.5, 1.5, "A"),
            (3.0, 2.5, "A"),
            (-2.0, -1.0, "B"),
            (-1.5, -2.5, "B"),
            (-3.0, -2.0, "B"),
        ]);
        let m = train_svm(&d, &SvmParams::new(Kernel::Linear, 1.0)).unwrap();
        assert_eq!(accuracy(&m, &d), 1.0);
        assert!(m.max_kkt_violation(&d) <= 1e-3);
        let sv = m.machines[0].sv_indices[0];
        assert_eq!(m.predict(&d.rows[sv].values).unwrap(), d.labels[sv]);
    }

    #[test]
    fn xor_needs_rbf() {
        let d = xor();
        let rbf = train_svm(&d, &SvmParams::new(Kernel::Rbf { gamma: 1.0 }, 10.0)).unwrap();
        assert_eq!(accuracy(&rbf, &d), 1.0);
        assert!(rbf.max_kkt_violation(&d) <= 1e-3);
        let lin = train_svm(&d, &SvmParams::new(Kernel::Linear, 1.0)).unwrap();
        assert!(accuracy(&lin, &d) <= 0.75);
    }

    #[test]
    fn errors() {
        let one = points(&[(0.0, 0.0, "A"), (1.0, 1.0, "A")]);
        assert!(matches!(
            train_svm(&one, &SvmParams::new(Kernel::Linear, 1.0)),
            Err(Error::SingleClassDataset)
        ));
        let bad = points(&[(0.0, f64::NAN, "A"), (1.0, 1.0, "B")]);
        assert!(matches!(
            train_svm(&bad, &SvmParams::new(Kernel::Linear, 1.0)),
            Err(Error::NonFiniteFeature { row: 0, col: 1 })
        ));
        let m = train_svm(&xor(), &SvmParams::new(Kernel::Linear, 1.0)).unwrap();
        assert!(matches!(m.predict(&[0.0; 3]), Err(Error::SchemaMismatch { expected: 4, got: 3 })));
    }

    #[test]
    fn mirrored_data_ties_lexicographically() {
        let d = points(&[(1.0, 2.0, "B"), (-1.0, -2.0, "A"), (2.0, 1.0, "B"), (-2.0, -1.0, "A")]);
        let m = train_svm(&d, &SvmParams::new(Kernel::Linear, 1.0)).unwrap();
        assert!(m.decision_values(&[0.0; 4]).unwrap()[0].value.abs() <= VOTE_EPSILON);
        assert_eq!(m.predict(&[0.0; 4]).unwrap(), "A");
    }

    #[test]
    fn three_class_vote() {
        let d = points(&[
            (0.0, 5.0, "A"),
            (0.5, 5.5, "A"),
            (5.0, 0.0, "B"),
            (5.5, 0.5, "B"),
            (-5.0, -5.0, "C"),
            (-5.5, -4.5, "C"),
        ]);
        let m = train_svm(&d, &SvmParams::new(Kernel::Rbf { gamma: 0.1 }, 1.0)).unwrap();
        assert_eq!(m.machines.len(), 3);
        assert_eq!(accuracy(&m, &d), 1.0);
    }

    #[test]
    fn save_load_is_bit_exact() {
        let d = xor();
        let m = train_svm(&d, &SvmParams::new(Kernel::Rbf { gamma: 0.7 }, 3.0)).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = SvmModel::read_from(&buf[..]).unwrap();
        assert_eq!(back, m);
        for x in [[0.3, 0.9, 0.0, 0.0], [5.0, -1.0, 0.0, 0.0]] {
            let a = m.decision_values(&x).unwrap();
            let b = back.decision_values(&x).unwrap();
            assert_eq!(a[0].value.to_bits(), b[0].value.to_bits());
        }
        let n = buf.len();
        buf[n - 1] ^= 1;
        assert!(matches!(SvmModel::read_from(&buf[..]), Err(Error::ModelFormat(_))));
    }
}
