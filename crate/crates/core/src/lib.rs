//! Contextual pattern mining and counting over terminated byte texts.
//!
//! Every length-m window of a text has a set of distinct flank pairs: the up
//! to `l` letters before an occurrence and the up to `r` letters after it,
//! truncated at the text boundaries. This crate mines all windows whose pair
//! set reaches a threshold, either fully in memory ([`mine::mine_im`]) or
//! through disk-backed runs under a fixed memory budget ([`em::mine_em`]),
//! and builds indexes that count a pattern's distinct pairs without
//! enumerating them ([`index::build_index`]), including a variant whose size
//! tracks the text's compressibility rather than its length
//! ([`index::build_optimized_index`]).
//!
//! Supporting structures are exposed as modules: suffix arrays and LCP/LCE
//! tables ([`suffix`]), suffix trees with marker cutting ([`suffix_tree`]),
//! heavy-path decomposition ([`hpd`]), orthogonal range counting
//! ([`range_count`]), and the greedy leftmost-longest parse with its reduced
//! string ([`lz77`]). The [`oracle`] module holds the brute-force references
//! everything is checked against.

pub mod em;
pub mod hpd;
pub mod index;
pub mod index_io;
pub mod lz77;
pub mod mine;
pub mod oracle;
pub(crate) mod prefix_tree;
pub mod range_count;
pub mod suffix;
pub mod suffix_tree;
pub mod text;

pub use em::{mine_em, mine_em_with_stats, EmConfig, IoStats};
pub use index::{
    build_index, build_optimized_index, build_simple_index, CpcIndex, IndexError, QueryParts,
    SimpleIndex,
};
pub use index_io::{load_index, load_index_file, save_index, save_index_file, IndexIoError};
pub use mine::{mine_im, MineError, MinedPattern};
pub use text::{SentinelPolicy, Text, TextError};
