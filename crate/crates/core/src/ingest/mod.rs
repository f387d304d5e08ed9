//! Loading subject metadata and face embeddings into a joined [`Dataset`].

mod dataset;
pub(crate) use dataset::unit_normalize;
mod f2be;
mod metadata;

pub use dataset::{build_dataset, BuildReport, Dataset, Person};
pub use f2be::{
    decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, EmbeddingVector,
    F2BE_MAGIC, F2BE_VERSION,
};
pub use metadata::{load_metadata, parse_metadata, write_metadata, METADATA_HEADER};

use std::path::Path;

use crate::error::Result;

/// Reads both input files and joins them.
pub fn load_dataset(
    metadata: impl AsRef<Path>,
    embeddings: impl AsRef<Path>,
    normalize: bool,
) -> Result<(Dataset, BuildReport)> {
    let records = load_metadata(metadata)?;
    let vectors = read_embeddings(embeddings)?;
    build_dataset(records, &vectors, normalize)
}
