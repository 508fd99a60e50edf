//! File formats: Matrix Market matrices, JSON polynomial systems and CSV
//! optimization reports.

mod mtx;
mod polyfile;
mod report;

pub use mtx::{format_matrix_market, parse_matrix_market, read_matrix, write_matrix};
pub use polyfile::{format_polysys, parse_polysys, read_polysys, write_polysys};
pub use report::{format_report_csv, REPORT_HEADER};
