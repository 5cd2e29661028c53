//! Configuration-driven pipeline orchestration with reproducible manifests.

pub mod config;
pub mod manifest;
mod run;

pub use config::{validate_config, PipelineConfig};
pub use manifest::DatasetManifest;
pub use run::{
    build_channels, build_dataset, build_labels, build_probe, build_scaled, build_split,
    build_unscaled, flattened_csv_bytes, labels_csv_bytes, load_input, resolve_groups,
    run_pipeline, slice_spec, tensor_blob_bytes, tensor_meta_json, BuiltDataset,
};
