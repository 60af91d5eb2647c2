//! Guide chapters, compiled as doc-tests so the snippets cannot rot.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/sequences.md")]
pub mod sequences {}
#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}
#[doc = include_str!("../../../book/src/statistic.md")]
pub mod statistic {}
#[doc = include_str!("../../../book/src/bin-selection.md")]
pub mod bin_selection {}
#[doc = include_str!("../../../book/src/generators.md")]
pub mod generators {}
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/reproducibility.md")]
pub mod reproducibility {}
