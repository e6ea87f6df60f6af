//! Treebank postprocessing, splitting and annotation agreement.

mod agreement;
mod extract;
mod split;

pub use agreement::{
    agreement, attachment_agreement, cohen_kappa, AgreementError, AgreementResult,
    AttachmentAgreement,
};
pub use extract::{extract_trees, filter_trees, Discarded};
pub use split::{stratified_split, Split, SplitError, SplitSpec};
