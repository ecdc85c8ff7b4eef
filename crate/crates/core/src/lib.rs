//! Semantic trajectory data warehouse: Stop/Move segmentation, semantic
//! enrichment, a star-schema store with an ETL pipeline, and OLAP queries.

pub mod enrichment;
pub mod etl;
pub mod geo;
pub mod numeric;
pub mod olap;
pub mod trajectory;
pub mod warehouse;
