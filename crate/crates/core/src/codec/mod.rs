//! Shuffle-phase coding: V-sets, U-symbol segmentation, coded multicast
//! messages, XOR-peeling decode for `s = 1`, and rank compression.

mod decode;
mod encode;
mod ld;
mod vset;

pub use decode::{decode_cdc_s1, LocalView, ReceivedMessages};
pub use encode::{
    coefficient_field, component_bits, encode_cdc, encode_node_messages, groups_of, message_bits,
    message_components, source_segments, CodedMessage,
};
pub use ld::{ld_compress, ld_decompress, ld_decompress_groups, LdPayload};
pub use vset::{build_vset, segment_bits, segment_usymbol, vset_size, USymbol, VSet, ValueSource};
