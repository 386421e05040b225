//! MIMO channel representation, Gram-matrix eigenvalues, and water-filling
//! power allocation.
//!
//! Channel matrices are amplitude gains normalized by the noise standard
//! deviation, so the eigenvalues of `HᴴH` are linear SNR gains per unit
//! transmit power and the SISO case collapses to `γ = |h|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues below `λ_1 * RANK_REL_THRESHOLD` count as rank-deficient modes.
pub const RANK_REL_THRESHOLD: f64 = 1e-12;

const LN2: f64 = std::f64::consts::LN_2;

/// Dense complex matrix, row-major. Serialized as rows of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let data = (0..rows * cols)
            .map(|k| f(k / cols, k % cols))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Gram matrix `HᴴH` (cols x cols), Hermitian positive semidefinite.
    fn gram(&self) -> Vec<Complex64> {
        let n = self.cols;
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.rows {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                g[i * n + j] = acc;
            }
        }
        g
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for CMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidInput("matrix must be non-empty".into()));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)))
            .collect();
        CMatrix::new(nrows, ncols, data)
    }
}

impl From<CMatrix> for Vec<Vec<[f64; 2]>> {
    fn from(m: CMatrix) -> Self {
        (0..m.rows)
            .map(|i| (0..m.cols).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
            .collect()
    }
}

/// UL/DL MIMO channels together with their sorted Gram eigenvalue spectra.
#[derive(Clone, Debug)]
pub struct ChannelState {
    pub h_ul: CMatrix,
    pub h_dl: CMatrix,
    pub w_ul: f64,
    pub w_dl: f64,
    /// Eigenvalues of `h_ulᴴ h_ul`, non-increasing.
    pub eigs_ul: Vec<f64>,
    /// Eigenvalues of `h_dlᴴ h_dl`, non-increasing.
    pub eigs_dl: Vec<f64>,
}

impl ChannelState {
    /// `h_ul` is n_fap x n_mt, `h_dl` is n_mt x n_fap.
    pub fn new(h_ul: CMatrix, h_dl: CMatrix, w_ul: f64, w_dl: f64) -> Result<Self> {
        if !(w_ul > 0.0) || !(w_dl > 0.0) {
            return Err(Error::InvalidInput("bandwidths must be positive".into()));
        }
        if h_ul.cols() != h_dl.rows() || h_ul.rows() != h_dl.cols() {
            return Err(Error::InvalidInput(format!(
                "UL ({}x{}) and DL ({}x{}) dimensions do not match a single MT/FAP pair",
                h_ul.rows(),
                h_ul.cols(),
                h_dl.rows(),
                h_dl.cols()
            )));
        }
        let eigs_ul = gram_eigenvalues(&h_ul)?;
        let eigs_dl = gram_eigenvalues(&h_dl)?;
        Ok(Self { h_ul, h_dl, w_ul, w_dl, eigs_ul, eigs_dl })
    }

    pub fn n_mt(&self) -> usize {
        self.h_ul.cols()
    }

    pub fn n_fap(&self) -> usize {
        self.h_ul.rows()
    }

    pub fn min_antennas(&self) -> usize {
        self.n_mt().min(self.n_fap())
    }
}

/// Eigenvalues of the Hermitian Gram matrix `hᴴh`, sorted non-increasing.
///
/// The decomposition runs on the real symmetric embedding
/// `[[Re G, -Im G], [Im G, Re G]]` whose spectrum is that of `G` with every
/// eigenvalue doubled, so a plain cyclic Jacobi sweep suffices.
pub fn gram_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    if !h.is_finite() {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    let n = h.cols();
    let g = h.gram();
    // Real symmetric embedding, 2n x 2n.
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = g[i * n + j];
            a[i * m + j] = z.re;
            a[(i + n) * m + (j + n)] = z.re;
            a[i * m + (j + n)] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    let mut all = jacobi_eigenvalues(a, m);
    all.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // Doubled spectrum: keep every other value, clamp roundoff negatives.
    Ok(all.iter().step_by(2).map(|&v| v.max(0.0)).collect())
}

/// Cyclic Jacobi for a real symmetric matrix (row-major), eigenvalues only.
fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let frob: f64 = a.iter().map(|x| x * x).sum();
    let stop = frob * 1e-30 + f64::MIN_POSITIVE;
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp - s * (akq + tau * akp);
                    let new_kq = akq + s * (akp - tau * akq);
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Number of eigenvalues above the rank threshold.
pub fn effective_rank(eigs: &[f64]) -> usize {
    let lead = eigs.first().copied().unwrap_or(0.0);
    if lead <= 0.0 {
        return 0;
    }
    eigs.iter().filter(|&&l| l > lead * RANK_REL_THRESHOLD).count()
}

/// Minimum-power water-filling allocation at a target rate.
#[derive(Clone, Debug, Serialize)]
pub struct WaterFillResult {
    /// Number of active eigenmodes K.
    pub k_active: usize,
    /// The water level c (W); power on mode i is `c - 1/λ_i`.
    pub water_level: f64,
    /// Per-active-mode powers, W.
    pub mode_powers: Vec<f64>,
    /// Total radiated power, W.
    pub total_power: f64,
    /// Rate actually achieved, bit/s.
    pub achieved_rate: f64,
}

/// Minimum total power that supports `rate` over the eigenmodes `eigs`
/// (non-increasing) with bandwidth `w`.
///
/// The water level is `c = 2^(r/(wK)) / (Π_{i≤K} λ_i)^(1/K)` with K the
/// unique active-mode count satisfying `c > 1/λ_K` and `c ≤ 1/λ_{K+1}`.
pub fn min_power_waterfill(eigs: &[f64], rate: f64, w: f64) -> Result<WaterFillResult> {
    if !(w > 0.0) {
        return Err(Error::InvalidInput("bandwidth must be positive".into()));
    }
    if !(rate >= 0.0) {
        return Err(Error::InvalidInput("rate must be non-negative".into()));
    }
    let rank = effective_rank(eigs);
    if rate == 0.0 {
        return Ok(WaterFillResult {
            k_active: 0,
            water_level: 0.0,
            mode_powers: vec![],
            total_power: 0.0,
            achieved_rate: 0.0,
        });
    }
    if rank == 0 {
        return Err(Error::NoChannel);
    }

    // ln c(k) = (r ln2 / w - Σ_{i≤k} ln λ_i) / k; pick the smallest k whose
    // two-sided condition holds (the spec's tie-break at exact equality).
    let mut sum_ln = 0.0;
    let mut k_active = rank;
    let mut ln_c = 0.0;
    for k in 1..=rank {
        sum_ln += eigs[k - 1].ln();
        let ln_ck = (rate * LN2 / w - sum_ln) / k as f64;
        let above_k = ln_ck > -eigs[k - 1].ln();
        let below_next = k == rank || ln_ck <= -eigs[k].ln();
        if above_k && below_next {
            k_active = k;
            ln_c = ln_ck;
            break;
        }
        if k == rank {
            // Numerical corner: fall back to full rank.
            k_active = rank;
            ln_c = ln_ck;
        }
    }
    let c = ln_c.exp();
    let mode_powers: Vec<f64> = eigs[..k_active].iter().map(|&l| (c - 1.0 / l).max(0.0)).collect();
    let total_power = mode_powers.iter().sum();
    let achieved_rate = w
        * mode_powers
            .iter()
            .zip(&eigs[..k_active])
            .map(|(&p, &l)| (1.0 + p * l).log2())
            .sum::<f64>();
    Ok(WaterFillResult { k_active, water_level: c, mode_powers, total_power, achieved_rate })
}

/// Maximum rate supported by water-filling a total power budget over the
/// eigenmodes, clipped at `cap` (bit/s; may be infinite).
pub fn max_rate_waterfill(eigs: &[f64], p_total: f64, w: f64, cap: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidInput("bandwidth must be positive".into()));
    }
    if !(p_total >= 0.0) {
        return Err(Error::InvalidInput("power must be non-negative".into()));
    }
    if !(cap > 0.0) {
        return Err(Error::InvalidInput("rate cap must be positive".into()));
    }
    let rank = effective_rank(eigs);
    if rank == 0 || p_total == 0.0 {
        return Ok(0.0);
    }
    // Largest k with water level (p + Σ 1/λ_i)/k above 1/λ_k.
    let mut inv_sum = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=rank {
        inv_sum += 1.0 / eigs[k - 1];
        let c = (p_total + inv_sum) / k as f64;
        if c > 1.0 / eigs[k - 1] {
            best = Some((k, c));
        }
    }
    let (k, c) = best.unwrap_or((1, p_total + 1.0 / eigs[0]));
    let rate = w * eigs[..k].iter().map(|&l| (c * l).log2()).sum::<f64>();
    Ok(rate.min(cap))
}
