//! Derived matrix features, hybrid feature vectors, and standardization.
//!
//! The hybrid schema for an `n x n` matrix is, in order:
//!
//! ```text
//! spectral_radius, fiedler_value, trace,
//! re_lambda_1..re_lambda_n, im_lambda_1..im_lambda_n,
//! abs_c_0..abs_c_{n-1},
//! entry_1_1..entry_n_n (row-major, 1-based)
//! ```
//!
//! for a total of `3 + 3n + n^2` features (73 when `n = 7`). Eigenvalues
//! are sorted by `(re, im)` descending so the per-slot values are
//! deterministic. The coefficient ratios `|c0/c1|` and `|c0/(c1+c2)|`
//! are carried separately from the main schema and are `None` whenever
//! the denominator magnitude is at or below `denom_tol`.
//!
//! The Fiedler value is computed from the symmetrized absolute weight
//! graph `W_ij = (|A_ij| + |A_ji|)/2` with Laplacian `L = D - W`; this
//! reduces to the standard graph Laplacian for adjacency-like inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::datagen::Dataset;
use crate::linalg::{char_poly, eigenvalues, CharPoly, LinalgError, Spectrum, SquareMatrix};

/// Denominators at or below this magnitude make a ratio undefined.
/// The default only rejects true zeros.
pub const DEFAULT_DENOM_TOL: f64 = 1e-300;

/// Ordered feature names for one matrix dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    n: usize,
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn new(n: usize) -> Self {
        let mut names = Vec::with_capacity(3 + 3 * n + n * n);
        names.push(String::from("spectral_radius"));
        names.push(String::from("fiedler_value"));
        names.push(String::from("trace"));
        for i in 1..=n {
            names.push(format!("re_lambda_{i}"));
        }
        for i in 1..=n {
            names.push(format!("im_lambda_{i}"));
        }
        for k in 0..n {
            names.push(format!("abs_c_{k}"));
        }
        for i in 1..=n {
            for j in 1..=n {
                names.push(format!("entry_{i}_{j}"));
            }
        }
        Self { n, names }
    }

    pub fn matrix_dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|x| x == name)
    }

    /// Index of `abs_c_k`; stable across schema versions.
    pub fn abs_coeff_index(&self, k: usize) -> usize {
        debug_assert!(k < self.n);
        3 + 2 * self.n + k
    }

    /// Index of `entry_i_j` (1-based indices).
    pub fn entry_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.n && j >= 1 && j <= self.n);
        3 + 3 * self.n + (i - 1) * self.n + (j - 1)
    }
}

/// Coefficient ratios DF8/DF9; `None` encodes an undefined ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioFeatures {
    /// `|c0 / c1|`.
    pub r01: Option<f64>,
    /// `|c0 / (c1 + c2)|`.
    pub r012: Option<f64>,
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(s: &Spectrum) -> f64 {
    s.values()
        .iter()
        .map(|e| e.modulus())
        .fold(0.0f64, f64::max)
}

/// Second-smallest eigenvalue of the symmetrized absolute-weight graph
/// Laplacian of `a`.
pub fn fiedler_value(a: &SquareMatrix) -> Result<f64, LinalgError> {
    let n = a.dim();
    debug_assert!(n >= 2);
    let mut lap = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let w = 0.5 * (a.get(i, j).abs() + a.get(j, i).abs());
            lap.set(i, j, -w);
            degree += w;
        }
        lap.set(i, i, degree);
    }
    let spec = eigenvalues(&lap)?;
    let mut re: Vec<f64> = spec.values().iter().map(|e| e.re).collect();
    re.sort_by(|x, y| x.partial_cmp(y).expect("real eigenvalues"));
    Ok(re[1])
}

/// Full hybrid feature vector of `a`, ordered per [`FeatureSchema`].
pub fn derived_features(a: &SquareMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = a.dim();
    let spec = eigenvalues(a)?;
    let fiedler = fiedler_value(a)?;
    let poly = char_poly(a);

    let mut eigs: Vec<(f64, f64)> = spec.values().iter().map(|e| (e.re, e.im)).collect();
    eigs.sort_by(|x, y| {
        y.0.partial_cmp(&x.0)
            .expect("finite")
            .then(y.1.partial_cmp(&x.1).expect("finite"))
    });

    let mut out = Vec::with_capacity(3 + 3 * n + n * n);
    out.push(spectral_radius(&spec));
    out.push(fiedler);
    out.push(a.trace());
    out.extend(eigs.iter().map(|e| e.0));
    out.extend(eigs.iter().map(|e| e.1));
    out.extend(poly.coeffs.iter().map(|c| c.abs()));
    out.extend_from_slice(a.entries());
    Ok(out)
}

/// DF8/DF9 ratios with guarded denominators.
pub fn ratio_features(c: &CharPoly, denom_tol: f64) -> RatioFeatures {
    debug_assert!(denom_tol >= 0.0);
    let c0 = c.c0().abs();
    let c1 = c.c1();
    let c12 = c.c1() + c.coeff(2);
    let r01 = (c1.abs() > denom_tol).then(|| c0 / c1.abs());
    let r012 = (c12.abs() > denom_tol).then(|| c0 / c12.abs());
    RatioFeatures { r01, r012 }
}

/// A per-sample feature extraction failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    /// Index into the source dataset.
    pub dataset_row: usize,
    pub error: LinalgError,
}

/// Feature matrix plus labels and ratio columns for one dataset.
///
/// Rows follow dataset order; samples whose eigenvalue computation failed
/// are skipped and recorded in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    values: Vec<f64>,
    pub labels: Vec<bool>,
    pub ratios: Vec<RatioFeatures>,
    pub failures: Vec<RowFailure>,
}

impl FeatureTable {
    pub fn from_parts(
        schema: FeatureSchema,
        values: Vec<f64>,
        labels: Vec<bool>,
        ratios: Vec<RatioFeatures>,
    ) -> Self {
        assert_eq!(values.len(), labels.len() * schema.len());
        assert_eq!(labels.len(), ratios.len());
        Self {
            schema,
            values,
            labels,
            ratios,
            failures: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.row(i)[j]).collect()
    }

    /// Flat row-major submatrix restricted to the given columns.
    pub fn select_columns(&self, cols: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            out.extend(cols.iter().map(|&c| row[c]));
        }
        out
    }
}

/// Extract the feature table of a dataset.
pub fn featurize_dataset(d: &Dataset) -> FeatureTable {
    let schema = FeatureSchema::new(d.n);
    let width = schema.len();
    let mut values = Vec::with_capacity(d.len() * width);
    let mut labels = Vec::with_capacity(d.len());
    let mut ratios = Vec::with_capacity(d.len());
    let mut failures = Vec::new();
    for (row, sample) in d.samples.iter().enumerate() {
        match derived_features(&sample.matrix) {
            Ok(v) => {
                values.extend_from_slice(&v);
                labels.push(sample.monotone);
                ratios.push(ratio_features(
                    &char_poly(&sample.matrix),
                    DEFAULT_DENOM_TOL,
                ));
            }
            Err(error) => failures.push(RowFailure {
                dataset_row: row,
                error,
            }),
        }
    }
    FeatureTable {
        schema,
        values,
        labels,
        ratios,
        failures,
    }
}

/// Per-feature z-score transform fitted on a training subset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Features whose training variance was zero; their std is forced
    /// to 1 so the transform maps them to a constant 0.
    pub constant: Vec<bool>,
}

impl Standardizer {
    /// Fit on the rows selected by `train_mask` (population statistics).
    pub fn fit(table: &FeatureTable, train_mask: &[bool]) -> Self {
        Self::fit_matrix(table.values(), table.width(), train_mask)
    }

    /// Fit on a flat row-major matrix.
    pub fn fit_matrix(values: &[f64], width: usize, train_mask: &[bool]) -> Self {
        assert!(width > 0);
        assert_eq!(values.len(), width * train_mask.len());
        let m = train_mask.iter().filter(|&&t| t).count();
        assert!(m >= 2, "need at least two training rows");
        let row = |i: usize| &values[i * width..(i + 1) * width];
        let mut means = vec![0.0; width];
        for (i, _) in train_mask.iter().enumerate().filter(|(_, &t)| t) {
            for (acc, v) in means.iter_mut().zip(row(i)) {
                *acc += v;
            }
        }
        for mu in &mut means {
            *mu /= m as f64;
        }
        let mut vars = vec![0.0; width];
        for (i, _) in train_mask.iter().enumerate().filter(|(_, &t)| t) {
            for ((acc, mu), v) in vars.iter_mut().zip(&means).zip(row(i)) {
                let d = v - mu;
                *acc += d * d;
            }
        }
        let mut stds = Vec::with_capacity(width);
        let mut constant = Vec::with_capacity(width);
        for var in vars {
            let sd = (var / m as f64).sqrt();
            if sd > 0.0 {
                stds.push(sd);
                constant.push(false);
            } else {
                stds.push(1.0);
                constant.push(true);
            }
        }
        Self {
            means,
            stds,
            constant,
        }
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.width());
        for ((v, mu), sd) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = (*v - mu) / sd;
        }
    }

    pub fn inverse_transform_row(&self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.width());
        for ((v, mu), sd) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *v = *v * sd + mu;
        }
    }

    /// Transform every row of the table in place.
    pub fn apply(&self, table: &mut FeatureTable) {
        let w = self.width();
        assert_eq!(w, table.width());
        for chunk in table.values_mut().chunks_mut(w) {
            self.transform_row(chunk);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_balanced, DEFAULT_ATTEMPT_CAP};
    use crate::linalg::{invert, lu_decompose, solve, DEFAULT_PIVOT_TOL};
    use crate::rng::RngStream;

    #[test]
    fn schema_shape_and_lookups() {
        let s = FeatureSchema::new(7);
        assert_eq!(s.len(), 73);
        assert_eq!(s.index_of("abs_c_0"), Some(s.abs_coeff_index(0)));
        assert_eq!(s.index_of("abs_c_1"), Some(s.abs_coeff_index(1)));
        assert_eq!(s.index_of("entry_7_2"), Some(s.entry_index(7, 2)));
        // Names are unique.
        let mut names = s.names().to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), s.len());
    }

    #[test]
    fn spectral_radius_examples() {
        let d = SquareMatrix::diagonal(&[1.0, -3.0, 2.0]).unwrap();
        assert!((spectral_radius(&eigenvalues(&d).unwrap()) - 3.0).abs() < 1e-12);
        let rot = SquareMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        assert!((spectral_radius(&eigenvalues(&rot).unwrap()) - 1.0).abs() < 1e-12);
        let a = SquareMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]).unwrap();
        assert!((spectral_radius(&eigenvalues(&a).unwrap()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fiedler_examples() {
        let zero = SquareMatrix::zeros(3);
        assert!(fiedler_value(&zero).unwrap().abs() < 1e-12);
        // |A_ij| = 1 off the diagonal: complete-graph Laplacian spectrum {0, n, n}.
        let ones =
            SquareMatrix::from_rows(&[&[0.5, 1.0, -1.0], &[-1.0, 0.0, 1.0], &[1.0, -1.0, 0.7]])
                .unwrap();
        assert!((fiedler_value(&ones).unwrap() - 3.0).abs() < 1e-9);
        // Symmetric in A vs A^T by construction.
        let mut rng = RngStream::new(8, 0);
        let a = crate::datagen::sample_uniform_matrix(5, &mut rng);
        let f1 = fiedler_value(&a).unwrap();
        let f2 = fiedler_value(&a.transpose()).unwrap();
        assert!((f1 - f2).abs() < 1e-10);
    }

    #[test]
    fn derived_vector_identity_7() {
        let v = derived_features(&SquareMatrix::identity(7)).unwrap();
        let s = FeatureSchema::new(7);
        assert_eq!(v.len(), 73);
        assert!((v[0] - 1.0).abs() < 1e-12); // spectral radius
        assert!((v[2] - 7.0).abs() < 1e-12); // trace
        assert!((v[s.abs_coeff_index(0)] - 1.0).abs() < 1e-9); // |c_0| = 1
        assert!((v[s.abs_coeff_index(1)] - 7.0).abs() < 1e-9); // |c_1| = C(7,6)
    }

    #[test]
    fn derived_vector_diag_two() {
        let v = derived_features(&SquareMatrix::diagonal(&[1.0, 2.0]).unwrap()).unwrap();
        let want = [
            2.0, 0.0, 3.0, 2.0, 1.0, 0.0, 0.0, 2.0, 3.0, 1.0, 0.0, 0.0, 2.0,
        ];
        assert_eq!(v.len(), want.len());
        for (got, w) in v.iter().zip(want) {
            assert!((got - w).abs() < 1e-9, "{v:?}");
        }
    }

    #[test]
    fn ratio_examples() {
        let r = ratio_features(&char_poly(&SquareMatrix::identity(7)), DEFAULT_DENOM_TOL);
        assert!((r.r01.unwrap() - 1.0 / 7.0).abs() < 1e-12);

        let a = SquareMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]).unwrap();
        let r = ratio_features(&char_poly(&a), DEFAULT_DENOM_TOL);
        assert!((r.r01.unwrap() - 0.75).abs() < 1e-12);
        // Equals 1/tr(A^-1) with tr(A^-1) = 4/3.
        let inv = invert(&lu_decompose(&a, DEFAULT_PIVOT_TOL)).unwrap();
        assert!((r.r01.unwrap() - 1.0 / inv.trace()).abs() < 1e-12);

        // Guarded division when c1 = 0.
        let c = CharPoly {
            coeffs: vec![2.5, 0.0],
            adj_trace: 0.0,
        };
        assert_eq!(ratio_features(&c, DEFAULT_DENOM_TOL).r01, None);
    }

    #[test]
    fn ratio_identity_against_explicit_inverse() {
        let mut rng = RngStream::new(314, 0);
        let mut checked = 0;
        while checked < 1000 {
            let n = [3, 5, 7][checked % 3];
            let a = crate::datagen::sample_uniform_matrix(n, &mut rng);
            let f = lu_decompose(&a, DEFAULT_PIVOT_TOL);
            if f.singular {
                continue;
            }
            let r = ratio_features(&char_poly(&a), DEFAULT_DENOM_TOL);
            let Some(r01) = r.r01 else { continue };
            let tr_inv = invert(&f).unwrap().trace();
            let expect = 1.0 / tr_inv.abs();
            assert!(
                (r01 - expect).abs() <= 1e-8 * r01.max(1.0),
                "n={n}: r01 {r01} vs 1/|tr| {expect}"
            );
            checked += 1;
        }
    }

    #[test]
    fn monotone_ratio_uses_positive_inverse_trace() {
        let mut rng = RngStream::new(400, 0);
        for _ in 0..50 {
            let a = crate::datagen::make_m_matrix(5, &mut rng, 0.2);
            let f = lu_decompose(&a, DEFAULT_PIVOT_TOL);
            let tr_inv = invert(&f).unwrap().trace();
            assert!(tr_inv > 0.0);
            let r01 = ratio_features(&char_poly(&a), DEFAULT_DENOM_TOL)
                .r01
                .unwrap();
            assert!((r01 - 1.0 / tr_inv).abs() <= 1e-8 * r01.max(1.0));
        }
    }

    #[test]
    fn ratio_is_similarity_invariant() {
        let mut rng = RngStream::new(555, 0);
        for _ in 0..50 {
            let n = 5;
            let a = crate::datagen::sample_uniform_matrix(n, &mut rng);
            // Well-conditioned P: perturbation of I.
            let mut p = SquareMatrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    p.set(i, j, p.get(i, j) + 0.2 * rng.next_open_sym());
                }
            }
            let fp = lu_decompose(&p, DEFAULT_PIVOT_TOL);
            assert!(!fp.singular);
            // B = P^-1 (A P), column by column.
            let ap = a.mul(&p).unwrap();
            let mut b = SquareMatrix::zeros(n);
            for j in 0..n {
                let col: Vec<f64> = (0..n).map(|i| ap.get(i, j)).collect();
                let x = solve(&fp, &col).unwrap();
                for (i, v) in x.into_iter().enumerate() {
                    b.set(i, j, v);
                }
            }
            let ra = ratio_features(&char_poly(&a), DEFAULT_DENOM_TOL).r01;
            let rb = ratio_features(&char_poly(&b), DEFAULT_DENOM_TOL).r01;
            let (Some(ra), Some(rb)) = (ra, rb) else {
                continue;
            };
            assert!((ra - rb).abs() <= 1e-6 * ra.max(1e-12), "{ra} vs {rb}");
        }
    }

    #[test]
    fn featurize_shapes_and_no_failures() {
        let d = generate_balanced(3, 40, 21, 1, DEFAULT_ATTEMPT_CAP).unwrap();
        let t = featurize_dataset(&d);
        assert_eq!(t.n_rows(), 80);
        assert_eq!(t.width(), 3 + 9 + 9);
        assert!(t.failures.is_empty());
        assert_eq!(
            t.labels,
            d.samples.iter().map(|s| s.monotone).collect::<Vec<_>>()
        );
    }

    #[test]
    fn standardizer_contract() {
        let d = generate_balanced(3, 30, 5, 1, DEFAULT_ATTEMPT_CAP).unwrap();
        let mut t = featurize_dataset(&d);
        let mask: Vec<bool> = (0..t.n_rows()).map(|i| i % 5 != 0).collect();
        let std = Standardizer::fit(&t, &mask);

        // Round trip is the identity.
        let mut row = t.row(3).to_vec();
        let orig = row.clone();
        std.transform_row(&mut row);
        std.inverse_transform_row(&mut row);
        for (a, b) in row.iter().zip(&orig) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        // Training columns have mean 0 and std 1 after the transform.
        std.apply(&mut t);
        let m = mask.iter().filter(|&&x| x).count() as f64;
        for j in 0..t.width() {
            let mut mean = 0.0;
            let mut var = 0.0;
            for (i, _) in mask.iter().enumerate().filter(|(_, &x)| x) {
                mean += t.row(i)[j];
            }
            mean /= m;
            for (i, _) in mask.iter().enumerate().filter(|(_, &x)| x) {
                let v = t.row(i)[j] - mean;
                var += v * v;
            }
            let sd = (var / m).sqrt();
            assert!(mean.abs() < 1e-10, "col {j} mean {mean}");
            if !std.constant[j] {
                assert!((sd - 1.0).abs() < 1e-10, "col {j} sd {sd}");
            }
        }
    }

    #[test]
    fn constant_column_flagged_and_zeroed() {
        let schema = FeatureSchema::new(2);
        let w = schema.len();
        let mut values = Vec::new();
        for k in 0..4 {
            let mut row = vec![0.0; w];
            row[0] = k as f64; // varies; everything else constant
            values.extend(row);
        }
        let table = FeatureTable::from_parts(
            schema,
            values,
            vec![true, false, true, false],
            vec![
                RatioFeatures {
                    r01: None,
                    r012: None
                };
                4
            ],
        );
        let std = Standardizer::fit(&table, &[true; 4]);
        assert!(!std.constant[0]);
        assert!(std.constant[1]);
        let mut row = table.row(2).to_vec();
        std.transform_row(&mut row);
        assert_eq!(row[1], 0.0);
    }
}
