//! Ground-truth disorder model: the complex intervalley coupling Δ(d, y)
//! as two independent stationary Gaussian random fields (one per
//! quadrature) with Gaussian autocorrelation C(r) = exp(−r²/(2ℓ²)), ℓ
//! being of the order of the linear dot size.
//!
//! Generation convolves white Gaussian grids with a truncated Gaussian
//! kernel (separable, truncated at 4ℓ) on an enlarged grid and crops the
//! borders, so the interior is exactly stationary. The kernel std is
//! ℓ/√2 per axis, which makes the *field* autocorrelation length ℓ.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{wrap_phase, ComplexCoupling};

/// Parameters of the disorder field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldParams {
    pub extent_d_nm: f64,
    pub extent_y_nm: f64,
    pub grid_step_nm: f64,
    /// Autocorrelation length ℓ of each quadrature, in nm.
    pub corr_length_nm: f64,
    /// Standard deviation per quadrature, in µeV.
    pub sigma_uev: f64,
    pub mean_re_uev: f64,
    pub mean_im_uev: f64,
    /// Physical coordinate of grid index (0, 0).
    pub origin_d_nm: f64,
    pub origin_y_nm: f64,
    pub seed: u64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            extent_d_nm: 400.0,
            extent_y_nm: 40.0,
            grid_step_nm: 1.0,
            corr_length_nm: 20.0,
            // Sets the mean valley splitting to 2σ√(π/2) ≈ 25 µeV.
            sigma_uev: 10.0,
            mean_re_uev: 0.0,
            mean_im_uev: 0.0,
            origin_d_nm: 0.0,
            origin_y_nm: -20.0,
            seed: 0,
        }
    }
}

impl FieldParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid_step_nm <= 0.0 {
            return Err(Error::invalid("grid_step_nm must be positive"));
        }
        if self.corr_length_nm < self.grid_step_nm {
            return Err(Error::invalid(
                "corr_length_nm must be at least one grid step",
            ));
        }
        if self.sigma_uev < 0.0 {
            return Err(Error::invalid("sigma_uev must be non-negative"));
        }
        for (name, extent) in [
            ("extent_d_nm", self.extent_d_nm),
            ("extent_y_nm", self.extent_y_nm),
        ] {
            if extent <= 0.0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
            let cells = extent / self.grid_step_nm;
            if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
                return Err(Error::invalid(format!(
                    "{name} = {extent} is not an integer multiple of grid_step_nm"
                )));
            }
        }
        Ok(())
    }

    /// Grid size (n_d, n_y); points sit at origin + k·step, k = 0..n−1.
    pub fn grid_shape(&self) -> (usize, usize) {
        (
            (self.extent_d_nm / self.grid_step_nm).round() as usize,
            (self.extent_y_nm / self.grid_step_nm).round() as usize,
        )
    }
}

/// A realized disorder field: Δ at every grid node.
#[derive(Debug, Clone)]
pub struct ValleyField {
    grid: Array2<ComplexCoupling>,
    params: FieldParams,
}

/// A deep valley-splitting minimum and the phase change across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeepMinimum {
    /// Index of the minimum within the trace.
    pub index: usize,
    /// E_VS at the minimum, in µeV.
    pub evs_uev: f64,
    /// |φ(d_i) − φ(d_f)| across the flanking E_VS maxima, wrapped to [0, π].
    pub phase_jump: f64,
}

impl ValleyField {
    /// Wraps an existing grid; shape must match the params.
    pub fn from_grid(grid: Array2<ComplexCoupling>, params: FieldParams) -> Result<Self> {
        params.validate()?;
        if grid.dim() != params.grid_shape() {
            return Err(Error::invalid(format!(
                "grid shape {:?} does not match params {:?}",
                grid.dim(),
                params.grid_shape()
            )));
        }
        if grid.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("field contains non-finite entries"));
        }
        Ok(ValleyField { grid, params })
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    pub fn grid(&self) -> &Array2<ComplexCoupling> {
        &self.grid
    }

    /// Physical coordinates (d, y) of a grid node.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.params.origin_d_nm + i as f64 * self.params.grid_step_nm,
            self.params.origin_y_nm + j as f64 * self.params.grid_step_nm,
        )
    }

    /// Δ at physical coordinates by bilinear interpolation.
    pub fn value_at(&self, d_nm: f64, y_nm: f64) -> Result<ComplexCoupling> {
        let (n_d, n_y) = self.grid.dim();
        let fi = (d_nm - self.params.origin_d_nm) / self.params.grid_step_nm;
        let fj = (y_nm - self.params.origin_y_nm) / self.params.grid_step_nm;
        let tol = 1e-9;
        if fi < -tol || fi > (n_d - 1) as f64 + tol || fj < -tol || fj > (n_y - 1) as f64 + tol {
            return Err(Error::invalid(format!(
                "point (d = {d_nm} nm, y = {y_nm} nm) lies outside the field extent"
            )));
        }
        let i0 = (fi.floor().max(0.0) as usize).min(n_d.saturating_sub(2));
        let j0 = (fj.floor().max(0.0) as usize).min(n_y.saturating_sub(2));
        let t = (fi - i0 as f64).clamp(0.0, 1.0);
        let u = (fj - j0 as f64).clamp(0.0, 1.0);
        // Degenerate single-row/column grids fall back to nearest node.
        let i1 = (i0 + 1).min(n_d - 1);
        let j1 = (j0 + 1).min(n_y - 1);
        let g = &self.grid;
        let lerp = |a: f64, b: f64, s: f64| a + (b - a) * s;
        let re = lerp(
            lerp(g[[i0, j0]].re, g[[i1, j0]].re, t),
            lerp(g[[i0, j1]].re, g[[i1, j1]].re, t),
            u,
        );
        let im = lerp(
            lerp(g[[i0, j0]].im, g[[i1, j0]].im, t),
            lerp(g[[i0, j1]].im, g[[i1, j1]].im, t),
            u,
        );
        Ok(ComplexCoupling::new(re, im))
    }

    /// Sample mean of the real quadrature.
    pub fn mean_re(&self) -> f64 {
        self.grid.iter().map(|c| c.re).sum::<f64>() / self.grid.len() as f64
    }

    pub fn mean_im(&self) -> f64 {
        self.grid.iter().map(|c| c.im).sum::<f64>() / self.grid.len() as f64
    }

    /// Sample autocorrelation of the real quadrature at `lag_nm` along d.
    pub fn autocorr_re_d(&self, lag_nm: f64) -> Result<f64> {
        let lag = (lag_nm / self.params.grid_step_nm).round() as usize;
        let (n_d, n_y) = self.grid.dim();
        if lag == 0 || lag >= n_d {
            return Err(Error::invalid("autocorrelation lag outside grid"));
        }
        let mut a = Vec::with_capacity((n_d - lag) * n_y);
        let mut b = Vec::with_capacity((n_d - lag) * n_y);
        for i in 0..n_d - lag {
            for j in 0..n_y {
                a.push(self.grid[[i, j]].re);
                b.push(self.grid[[i + lag, j]].re);
            }
        }
        correlation(&a, &b)
    }

    /// Sample cross-correlation between the two quadratures.
    pub fn quadrature_cross_correlation(&self) -> Result<f64> {
        let re: Vec<f64> = self.grid.iter().map(|c| c.re).collect();
        let im: Vec<f64> = self.grid.iter().map(|c| c.im).collect();
        correlation(&re, &im)
    }
}

fn correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::numerical("zero variance in correlation"));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Generates a field realization. Deterministic for a fixed seed: the
/// white-noise grids are filled row-major (real quadrature first) from a
/// single ChaCha8 stream.
pub fn generate_field(params: &FieldParams) -> Result<ValleyField> {
    params.validate()?;
    let (n_d, n_y) = params.grid_shape();

    if params.sigma_uev == 0.0 {
        let grid = Array2::from_elem(
            (n_d, n_y),
            ComplexCoupling::new(params.mean_re_uev, params.mean_im_uev),
        );
        return ValleyField::from_grid(grid, params.clone());
    }

    // Kernel std ℓ/√2 (in cells) so the field autocorrelation length is ℓ.
    let a_cells = params.corr_length_nm / (std::f64::consts::SQRT_2 * params.grid_step_nm);
    let radius = (4.0 * params.corr_length_nm / params.grid_step_nm).ceil() as usize;
    let mut kernel: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|j| (-((j * j) as f64) / (2.0 * a_cells * a_cells)).exp())
        .collect();
    let norm = kernel.iter().map(|w| w * w).sum::<f64>().sqrt();
    for w in &mut kernel {
        *w /= norm;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let big = (n_d + 2 * radius, n_y + 2 * radius);
    let mut white_re = Array2::zeros(big);
    let mut white_im = Array2::zeros(big);
    for w in white_re.iter_mut() {
        *w = rng.sample::<f64, _>(StandardNormal);
    }
    for w in white_im.iter_mut() {
        *w = rng.sample::<f64, _>(StandardNormal);
    }

    let smooth_re = separable_convolve(&white_re, &kernel, n_d, n_y);
    let smooth_im = separable_convolve(&white_im, &kernel, n_d, n_y);

    let mut grid = Array2::from_elem((n_d, n_y), ComplexCoupling::ZERO);
    for i in 0..n_d {
        for j in 0..n_y {
            grid[[i, j]] = ComplexCoupling::new(
                params.mean_re_uev + params.sigma_uev * smooth_re[[i, j]],
                params.mean_im_uev + params.sigma_uev * smooth_im[[i, j]],
            );
        }
    }
    ValleyField::from_grid(grid, params.clone())
}

/// Two 1D passes of the normalized kernel over the enlarged grid, cropping
/// to (n_d, n_y). The kernel has unit sum of squares, so unit-variance
/// white input stays unit-variance.
fn separable_convolve(
    white: &Array2<f64>,
    kernel: &[f64],
    n_d: usize,
    n_y: usize,
) -> Array2<f64> {
    let k = kernel.len();
    let (_, big_y) = white.dim();
    // Pass along d: (n_d + 2R, big_y) -> (n_d, big_y)
    let mut pass1 = Array2::zeros((n_d, big_y));
    for i in 0..n_d {
        for j in 0..big_y {
            let mut acc = 0.0;
            for (o, w) in kernel.iter().enumerate() {
                acc += w * white[[i + o, j]];
            }
            pass1[[i, j]] = acc;
        }
    }
    // Pass along y: (n_d, n_y + 2R) -> (n_d, n_y)
    let mut out = Array2::zeros((n_d, n_y));
    for i in 0..n_d {
        for j in 0..n_y {
            let mut acc = 0.0;
            for (o, w) in kernel.iter().enumerate() {
                acc += w * pass1[[i, j + o]];
            }
            out[[i, j]] = acc;
        }
    }
    debug_assert_eq!(k, kernel.len());
    out
}

/// Δ(d) along a line of constant y, from `d_start` to `d_end` inclusive.
/// Off-grid points are bilinearly interpolated.
pub fn sample_trace(
    field: &ValleyField,
    y_nm: f64,
    d_start_nm: f64,
    d_end_nm: f64,
    step_nm: f64,
) -> Result<Vec<ComplexCoupling>> {
    if step_nm <= 0.0 || d_end_nm < d_start_nm {
        return Err(Error::invalid("trace requires step > 0 and d_end >= d_start"));
    }
    let n = ((d_end_nm - d_start_nm) / step_nm + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|k| field.value_at(d_start_nm + k as f64 * step_nm, y_nm))
        .collect()
}

/// Local minima of E_VS = 2|Δ| below `threshold_uev`, each annotated with
/// the valley-phase change across the minimum. Phase endpoints are taken
/// at the nearest flanking local maxima of E_VS (trace ends if none).
/// Traces shorter than 3 points have no interior minima.
pub fn deep_minima(trace: &[ComplexCoupling], threshold_uev: f64) -> Vec<DeepMinimum> {
    let evs: Vec<f64> = trace.iter().map(|c| 2.0 * c.magnitude()).collect();
    let n = evs.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    for i in 1..n - 1 {
        if !(evs[i] < evs[i - 1] && evs[i] < evs[i + 1] && evs[i] < threshold_uev) {
            continue;
        }
        let mut l = i;
        while l > 0 && evs[l - 1] > evs[l] {
            l -= 1;
        }
        let mut r = i;
        while r + 1 < n && evs[r + 1] > evs[r] {
            r += 1;
        }
        let jump = wrap_phase(trace[l].phase() - trace[r].phase()).abs();
        out.push(DeepMinimum {
            index: i,
            evs_uev: evs[i],
            phase_jump: jump,
        });
    }
    out
}
