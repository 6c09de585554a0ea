pub mod affect;
pub mod annotation;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod experiment;
pub mod features;
pub mod learn;
pub mod lsa;
pub mod ner;
pub mod readability;
pub mod stats;
pub mod text;
pub mod timex;

pub use error::{Error, Result};
