//! Systems `x⁽ᵏ⁾ = B̄ū` with box-bounded inputs, actuator splits and model files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model document: {source}")]
    Parse {
        line: usize,
        column: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("column index {index} out of range for a system with {columns} columns")]
    IndexOutOfRange { index: usize, columns: usize },
    #[error("column index {0} listed more than once")]
    DuplicateIndex(usize),
    #[error("at least one lost column is required")]
    NoLostColumns,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        field,
        reason: reason.into(),
    }
}

/// A generalized `k`-th order integrator `x⁽ᵏ⁾ = B̄ū`, `ū ∈ [ū_min, ū_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorSystem {
    name: String,
    order: u32,
    b_bar: DMatrix<f64>,
    u_min: DVector<f64>,
    u_max: DVector<f64>,
    labels: Option<Vec<String>>,
}

impl IntegratorSystem {
    pub fn new(
        name: impl Into<String>,
        order: u32,
        b_bar: DMatrix<f64>,
        u_min: DVector<f64>,
        u_max: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let sys = IntegratorSystem {
            name: name.into(),
            order,
            b_bar,
            u_min,
            u_max,
            labels: None,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.inputs() {
            return Err(invalid(
                "labels",
                format!("expected {} labels, got {}", self.inputs(), labels.len()),
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Same matrix and box, different integrator order.
    pub fn with_order(mut self, order: u32) -> Result<Self, ModelError> {
        if order == 0 {
            return Err(invalid("order", "must be at least 1"));
        }
        self.order = order;
        Ok(self)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (n, cols) = self.b_bar.shape();
        if self.order == 0 {
            return Err(invalid("order", "must be at least 1"));
        }
        if n == 0 {
            return Err(invalid("B", "must have at least one row"));
        }
        if cols == 0 {
            return Err(invalid("B", "must have at least one column"));
        }
        if self.u_min.len() != cols {
            return Err(invalid(
                "u_min",
                format!("length {} does not match {cols} columns", self.u_min.len()),
            ));
        }
        if self.u_max.len() != cols {
            return Err(invalid(
                "u_max",
                format!("length {} does not match {cols} columns", self.u_max.len()),
            ));
        }
        if let Some((idx, _)) = self.b_bar.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(
                "B",
                format!("entry ({}, {}) is not finite", idx % n, idx / n),
            ));
        }
        for i in 0..cols {
            let (lo, hi) = (self.u_min[i], self.u_max[i]);
            if !lo.is_finite() {
                return Err(invalid("u_min", format!("entry {i} is not finite")));
            }
            if !hi.is_finite() {
                return Err(invalid("u_max", format!("entry {i} is not finite")));
            }
            if lo >= hi {
                return Err(invalid(
                    "u_min",
                    format!("entry {i}: lower bound {lo} is not below upper bound {hi}"),
                ));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn b_bar(&self) -> &DMatrix<f64> {
        &self.b_bar
    }

    pub fn u_min(&self) -> &DVector<f64> {
        &self.u_min
    }

    pub fn u_max(&self) -> &DVector<f64> {
        &self.u_max
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// State dimension `n`.
    pub fn states(&self) -> usize {
        self.b_bar.nrows()
    }

    /// Number of actuators `m + p`.
    pub fn inputs(&self) -> usize {
        self.b_bar.ncols()
    }

    pub fn column_label(&self, j: usize) -> String {
        match &self.labels {
            Some(l) => l[j].clone(),
            None => format!("u{}", j + 1),
        }
    }

    pub fn contains_input(&self, u: &DVector<f64>, tol: f64) -> bool {
        u.len() == self.inputs() && in_box(u, &self.u_min, &self.u_max, tol)
    }

    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            name: self.name.clone(),
            order: self.order,
            b: self
                .b_bar
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            u_min: self.u_min.iter().copied().collect(),
            u_max: self.u_max.iter().copied().collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_model_file()).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Parse {
            line: e.line(),
            column: e.column(),
            source: e,
        })?;
        file.into_system()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| ModelError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub(crate) fn in_box(u: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>, tol: f64) -> bool {
    u.iter()
        .zip(lo.iter().zip(hi.iter()))
        .all(|(&v, (&l, &h))| v >= l - tol * (1.0 + l.abs()) && v <= h + tol * (1.0 + h.abs()))
}

/// Reads and validates a model document.
pub fn load_system(path: impl AsRef<Path>) -> Result<IntegratorSystem, ModelError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    IntegratorSystem::from_json(&text)
}

/// On-disk model schema. Matrices are row-major arrays of numbers.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub order: u32,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ModelFile {
    pub fn into_system(self) -> Result<IntegratorSystem, ModelError> {
        let n = self.b.len();
        if n == 0 {
            return Err(invalid("B", "must have at least one row"));
        }
        let cols = self.b[0].len();
        if let Some(i) = self.b.iter().position(|r| r.len() != cols) {
            return Err(invalid(
                "B",
                format!("row {i} has {} entries, row 0 has {cols}", self.b[i].len()),
            ));
        }
        let b_bar = DMatrix::from_fn(n, cols, |i, j| self.b[i][j]);
        let sys = IntegratorSystem::new(
            self.name,
            self.order,
            b_bar,
            DVector::from_vec(self.u_min),
            DVector::from_vec(self.u_max),
        )?;
        match self.labels {
            Some(l) => sys.with_labels(l),
            None => Ok(sys),
        }
    }
}

/// Target distance `d = x_goal − x_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(DVector<f64>);

impl Direction {
    pub fn new(d: DVector<f64>) -> Result<Self, ModelError> {
        if d.is_empty() {
            return Err(invalid("direction", "must have at least one component"));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(invalid("direction", "entries must be finite"));
        }
        Ok(Direction(d))
    }

    pub fn from_slice(d: &[f64]) -> Result<Self, ModelError> {
        Self::new(DVector::from_column_slice(d))
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scaled(&self, alpha: f64) -> Direction {
        Direction(&self.0 * alpha)
    }

    pub fn negated(&self) -> Direction {
        Direction(-&self.0)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Partition `B̄ = [B C]` after losing control authority over `lost` columns.
///
/// Column indices are zero-based. `B` keeps the remaining columns in
/// ascending order, `C` the lost columns in the order given.
#[derive(Clone, Debug)]
pub struct ActuatorSplit {
    base: IntegratorSystem,
    kept: Vec<usize>,
    lost: Vec<usize>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    u_min: DVector<f64>,
    u_max: DVector<f64>,
    w_min: DVector<f64>,
    w_max: DVector<f64>,
}

/// Splits `sys` into controlled and lost actuators.
pub fn split(sys: &IntegratorSystem, lost: &[usize]) -> Result<ActuatorSplit, ModelError> {
    let cols = sys.inputs();
    if lost.is_empty() {
        return Err(ModelError::NoLostColumns);
    }
    let mut seen = vec![false; cols];
    for &j in lost {
        if j >= cols {
            return Err(ModelError::IndexOutOfRange {
                index: j,
                columns: cols,
            });
        }
        if seen[j] {
            return Err(ModelError::DuplicateIndex(j));
        }
        seen[j] = true;
    }
    let kept: Vec<usize> = (0..cols).filter(|&j| !seen[j]).collect();
    let b_bar = sys.b_bar();
    let pick = |idx: &[usize]| b_bar.select_columns(idx.iter());
    let sub = |v: &DVector<f64>, idx: &[usize]| DVector::from_iterator(idx.len(), idx.iter().map(|&j| v[j]));

    Ok(ActuatorSplit {
        base: sys.clone(),
        b: pick(&kept),
        c: pick(lost),
        u_min: sub(sys.u_min(), &kept),
        u_max: sub(sys.u_max(), &kept),
        w_min: sub(sys.u_min(), lost),
        w_max: sub(sys.u_max(), lost),
        kept,
        lost: lost.to_vec(),
    })
}

impl ActuatorSplit {
    pub fn base(&self) -> &IntegratorSystem {
        &self.base
    }

    pub fn kept_columns(&self) -> &[usize] {
        &self.kept
    }

    pub fn lost_columns(&self) -> &[usize] {
        &self.lost
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn u_min(&self) -> &DVector<f64> {
        &self.u_min
    }

    pub fn u_max(&self) -> &DVector<f64> {
        &self.u_max
    }

    pub fn w_min(&self) -> &DVector<f64> {
        &self.w_min
    }

    pub fn w_max(&self) -> &DVector<f64> {
        &self.w_max
    }

    /// Number of controlled actuators `m`.
    pub fn controlled(&self) -> usize {
        self.kept.len()
    }

    /// Number of lost actuators `p`.
    pub fn lost(&self) -> usize {
        self.lost.len()
    }

    pub fn order(&self) -> u32 {
        self.base.order()
    }

    /// `C` as a vector when exactly one column is lost.
    pub fn single_column(&self) -> Option<DVector<f64>> {
        (self.lost.len() == 1).then(|| self.c.column(0).into_owned())
    }

    pub fn contains_w(&self, w: &DVector<f64>, tol: f64) -> bool {
        w.len() == self.lost() && in_box(w, &self.w_min, &self.w_max, tol)
    }

    /// Puts `B` and `C` back into the original column order.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.base.states(), self.base.inputs());
        for (src, &dst) in self.kept.iter().enumerate() {
            out.set_column(dst, &self.b.column(src));
        }
        for (src, &dst) in self.lost.iter().enumerate() {
            out.set_column(dst, &self.c.column(src));
        }
        out
    }

    /// Assembles a full input `ū` from the controlled part `u` and the lost part `w`.
    pub fn merge_inputs(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.base.inputs());
        for (src, &dst) in self.kept.iter().enumerate() {
            out[dst] = u[src];
        }
        for (src, &dst) in self.lost.iter().enumerate() {
            out[dst] = w[src];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    fn toy2() -> IntegratorSystem {
        IntegratorSystem::new(
            "toy2",
            1,
            dmatrix![1.0, -1.0],
            dvector![-1.0, 0.0],
            dvector![3.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn toy2_split_views() {
        let s = split(&toy2(), &[1]).unwrap();
        assert_eq!(s.b(), &dmatrix![1.0]);
        assert_eq!(s.c(), &dmatrix![-1.0]);
        assert_eq!(s.u_min(), &dvector![-1.0]);
        assert_eq!(s.u_max(), &dvector![3.0]);
        assert_eq!(s.w_min(), &dvector![0.0]);
        assert_eq!(s.w_max(), &dvector![1.0]);
        assert_eq!(s.reassemble(), *toy2().b_bar());
    }

    #[test]
    fn toy1_split_views() {
        let sys = IntegratorSystem::new(
            "toy1",
            1,
            dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 0.0],
            dvector![-2.0, -2.0, -1.0],
            dvector![2.0, 2.0, 1.0],
        )
        .unwrap();
        let s = split(&sys, &[2]).unwrap();
        assert_eq!(s.single_column().unwrap(), dvector![1.0, 0.0]);
        assert_eq!((s.w_min()[0], s.w_max()[0]), (-1.0, 1.0));
        assert_eq!(s.kept_columns(), &[0, 1]);
    }

    #[test]
    fn rejects_bad_indices() {
        let sys = IntegratorSystem::new(
            "eight",
            1,
            DMatrix::from_element(1, 8, 1.0),
            DVector::zeros(8),
            DVector::from_element(8, 1.0),
        )
        .unwrap();
        assert!(matches!(
            split(&sys, &[8]),
            Err(ModelError::IndexOutOfRange { index: 8, columns: 8 })
        ));
        assert!(matches!(split(&sys, &[1, 1]), Err(ModelError::DuplicateIndex(1))));
        assert!(matches!(split(&sys, &[]), Err(ModelError::NoLostColumns)));
    }

    #[test]
    fn degenerate_box_is_rejected() {
        let err = IntegratorSystem::new("d", 1, dmatrix![1.0], dvector![1.0], dvector![1.0])
            .unwrap_err();
        assert!(matches!(err, ModelError::Invalid { field: "u_min", .. }));
    }

    #[test]
    fn zero_order_and_nan_rejected() {
        assert!(IntegratorSystem::new("z", 0, dmatrix![1.0], dvector![0.0], dvector![1.0]).is_err());
        assert!(
            IntegratorSystem::new("n", 1, dmatrix![f64::NAN], dvector![0.0], dvector![1.0])
                .is_err()
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = IntegratorSystem::from_json("{\n  \"name\": \"x\",\n  \"order\": oops }").unwrap_err();
        match err {
            ModelError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_matrix_rejected() {
        let text = r#"{"name":"r","order":1,"B":[[1,2],[3]],"u_min":[0,0],"u_max":[1,1]}"#;
        assert!(matches!(
            IntegratorSystem::from_json(text),
            Err(ModelError::Invalid { field: "B", .. })
        ));
    }

    #[test]
    fn merge_inputs_restores_column_order() {
        let sys = IntegratorSystem::new(
            "m",
            1,
            dmatrix![1.0, 2.0, 3.0],
            dvector![0.0, 0.0, 0.0],
            dvector![1.0, 1.0, 1.0],
        )
        .unwrap();
        let s = split(&sys, &[0]).unwrap();
        assert_eq!(s.merge_inputs(&dvector![0.2, 0.3], &dvector![0.1]), dvector![0.1, 0.2, 0.3]);
    }
}
