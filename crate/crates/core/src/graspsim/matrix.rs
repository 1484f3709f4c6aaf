//! Success matrices over palm configurations and objects, and comparison
//! against reference tables.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{evaluate_grasp, FailureReason, GraspOutcome, GraspParams, ObjectSpec};
use crate::error::{Error, Result};
use crate::kinematics::PalmConfiguration;

const TABLE2_CSV: &str = include_str!("../../data/table2.csv");
const TABLE3_CSV: &str = include_str!("../../data/table3.csv");

/// One evaluated cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub config: String,
    pub object: String,
    pub outcome: GraspOutcome,
}

impl MatrixCell {
    pub fn mark(&self) -> CellMark {
        CellMark {
            success: self.outcome.success,
            reason: self.outcome.failure_reason,
        }
    }
}

/// Grasp outcomes for every (configuration, object) pair. Rows follow the
/// configuration order, columns the object order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessMatrix {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<MatrixCell>>,
}

impl SuccessMatrix {
    pub fn pattern(&self) -> PatternTable {
        PatternTable {
            rows: self.rows.clone(),
            cols: self.cols.clone(),
            cells: self
                .cells
                .iter()
                .map(|r| r.iter().map(MatrixCell::mark).collect())
                .collect(),
        }
    }

    pub fn success_count(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.outcome.success).count()
    }
}

/// Evaluates the full cross product of configurations and objects.
pub fn run_matrix(
    configs: &[(String, PalmConfiguration)],
    objects: &[ObjectSpec],
    params: &GraspParams,
) -> SuccessMatrix {
    let cells = configs
        .iter()
        .map(|(name, palm)| {
            objects
                .iter()
                .map(|o| MatrixCell {
                    config: name.clone(),
                    object: o.id.clone(),
                    outcome: evaluate_grasp(palm, o, params),
                })
                .collect()
        })
        .collect();
    SuccessMatrix {
        rows: configs.iter().map(|(n, _)| n.clone()).collect(),
        cols: objects.iter().map(|o| o.id.clone()).collect(),
        cells,
    }
}

/// Success flag with an optional failure reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellMark {
    pub success: bool,
    pub reason: Option<FailureReason>,
}

impl CellMark {
    fn to_field(self) -> String {
        match (self.success, self.reason) {
            (true, _) => "S".into(),
            (false, Some(r)) => format!("F:{r}"),
            (false, None) => "F".into(),
        }
    }

    fn parse(s: &str, line: usize) -> Result<Self> {
        let bad = || Error::Parse {
            line,
            message: format!("cell must be `S`, `F` or `F:<reason>`, got `{s}`"),
        };
        match s {
            "S" => Ok(Self {
                success: true,
                reason: None,
            }),
            "F" => Ok(Self {
                success: false,
                reason: None,
            }),
            _ => {
                let code = s.strip_prefix("F:").ok_or_else(bad)?;
                let reason = FailureReason::from_code(code).ok_or_else(bad)?;
                Ok(Self {
                    success: false,
                    reason: Some(reason),
                })
            }
        }
    }
}

/// A labelled success/failure grid, as stored in CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTable {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<CellMark>>,
}

impl PatternTable {
    pub fn get(&self, row: &str, col: &str) -> Option<CellMark> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.cols.iter().position(|c| c == col)?;
        Some(self.cells[i][j])
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec!["config".to_string()];
        header.extend(self.cols.iter().cloned());
        w.write_record(&header).map_err(io)?;
        for (name, row) in self.rows.iter().zip(&self.cells) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|m| m.to_field()));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        if headers.get(0) != Some("config") || headers.len() < 2 {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `config,<object>,...`".into(),
            });
        }
        let cols: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != cols.len() + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", cols.len() + 1, rec.len()),
                });
            }
            rows.push(rec[0].to_string());
            cells.push(
                rec.iter()
                    .skip(1)
                    .map(|f| CellMark::parse(f, line))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self { rows, cols, cells })
    }
}

/// Reference Table II: fixed configurations against the standard objects.
pub fn table2_truth() -> PatternTable {
    PatternTable::read_csv(TABLE2_CSV.as_bytes()).expect("shipped table parses")
}

/// Reference Table III: morphing templates against the real objects.
pub fn table3_truth() -> PatternTable {
    PatternTable::read_csv(TABLE3_CSV.as_bytes()).expect("shipped table parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub config: String,
    pub object: String,
    pub expected: bool,
    pub actual: bool,
    pub reason: Option<FailureReason>,
}

/// Cell-by-cell agreement of a computed pattern with a reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub matches: usize,
    pub total: usize,
    pub mismatches: Vec<Mismatch>,
}

impl Comparison {
    pub fn is_exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares every reference cell; rows and columns are matched by label.
pub fn compare(actual: &PatternTable, expected: &PatternTable) -> Result<Comparison> {
    let mut matches = 0;
    let mut mismatches = Vec::new();
    for (row, exp_row) in expected.rows.iter().zip(&expected.cells) {
        for (col, exp) in expected.cols.iter().zip(exp_row) {
            let got = actual
                .get(row, col)
                .ok_or_else(|| Error::param("matrix", format!("no cell for ({row}, {col})")))?;
            if got.success == exp.success {
                matches += 1;
            } else {
                mismatches.push(Mismatch {
                    config: row.clone(),
                    object: col.clone(),
                    expected: exp.success,
                    actual: got.success,
                    reason: got.reason,
                });
            }
        }
    }
    Ok(Comparison {
        matches,
        total: expected.rows.len() * expected.cols.len(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_tables_have_expected_shape() {
        let t2 = table2_truth();
        assert_eq!(t2.rows.len(), 6);
        assert_eq!(t2.cols, ["kite-s", "kite-l", "rect-s", "rect-l", "trap-s", "trap-l"]);
        assert_eq!(t2.cells.iter().flatten().filter(|m| m.success).count(), 12);
        let t3 = table3_truth();
        assert_eq!(t3.rows, ["rectangle", "trapezoid", "kite"]);
        assert!(t3.get("kite", "cup-noodles").unwrap().success);
        assert!(!t3.get("rectangle", "cup-noodles").unwrap().success);
    }

    #[test]
    fn pattern_csv_round_trip_with_reasons() {
        let p = PatternTable {
            rows: vec!["a".into()],
            cols: vec!["x".into(), "y".into(), "z".into()],
            cells: vec![vec![
                CellMark {
                    success: true,
                    reason: None,
                },
                CellMark {
                    success: false,
                    reason: Some(FailureReason::NoDescend),
                },
                CellMark {
                    success: false,
                    reason: None,
                },
            ]],
        };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "config,x,y,z\na,S,F:no_descend,F\n"
        );
        assert_eq!(PatternTable::read_csv(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn bad_cell_reports_line() {
        match PatternTable::read_csv("config,x\na,S\nb,maybe\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compare_counts_mismatches() {
        let truth = table2_truth();
        let mut flipped = truth.clone();
        flipped.cells[0][0].success = !flipped.cells[0][0].success;
        let c = compare(&flipped, &truth).unwrap();
        assert_eq!(c.matches, 35);
        assert_eq!(c.total, 36);
        assert_eq!(c.mismatches[0].object, "kite-s");
        assert!(compare(&truth, &truth).unwrap().is_exact());
    }

    #[test]
    fn empty_object_list_gives_empty_rows() {
        let palm = crate::kinematics::resolve_embedding([100.0; 4]).unwrap();
        let m = run_matrix(&[("p".into(), palm)], &[], &GraspParams::default());
        assert_eq!(m.cells, vec![Vec::<MatrixCell>::new()]);
        assert_eq!(m.success_count(), 0);
    }
}
