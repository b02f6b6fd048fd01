//! Machine checks for transcribed proof data: differential, extension,
//! bracket, and cell-complex records, mod-λ splitting, wedge-map
//! composition, and window scans for detectors, forced differentials, and
//! crossing differentials.

mod cells;
mod records;
mod scan;
mod wedge;

pub use cells::{check_cell_complex, mod_lambda_split_check, CellReport, Obstruction, SplitResult};
pub use records::{
    bracket_degree, check_bracket_record, check_differential_record, check_extension_record,
    extension_closure, massey_degree, BracketDegreeError,
};
pub use scan::{
    crossing_differential_scan, enumerate_detectors, forced_differential_candidates,
    CrossingEntry, CrossingReport, DetectorCandidate, ForcedDifferentialReport, ScanError,
    SourceCandidates,
};
pub use wedge::{compose_wedge_maps, Expression, Factor, Term, WedgeError, WedgeMap};
