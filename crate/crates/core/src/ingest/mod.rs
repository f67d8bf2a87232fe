//! Dataset persistence and Stack Exchange dump ingestion.

mod format;
mod mtx;
mod stackexchange;

pub use format::{escape_field, load_dataset, save_dataset, unescape_field, Manifest, FORMAT_VERSION};
pub use mtx::{read_matrix_market, write_matrix_market};
pub use stackexchange::{
    build_stackexchange, parse_posts, strip_html, IngestLog, IngestParams, PostReader, PostType,
    StackExchangePost,
};
