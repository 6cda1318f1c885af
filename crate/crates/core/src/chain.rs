//! Chain and lattice parameterizations of the nearest-neighbour XY model.
//!
//! All values are angular frequencies in rad/ns. Sites are indexed from 0 in
//! code; documentation uses the 1-based site numbers `n = 1..N`.
//!
//! In the zig-zag family the even sites (n = 2, 4, ...) sit at `2mJ` and the odd
//! sites at 0, which is the layout whose single-excitation spectrum is
//! `{-(N-1)/2, ..., -1, 0, 2m+1, ..., 2m+(N-1)/2}·J`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{angular_to_mhz, mhz_to_angular, round6};

/// How a [`ChainSpec`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Line,
    Zigzag,
    Fst,
    Effective,
    Custom,
}

impl ChainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChainKind::Line => "line",
            ChainKind::Zigzag => "zigzag",
            ChainKind::Fst => "fst",
            ChainKind::Effective => "effective",
            ChainKind::Custom => "custom",
        }
    }
}

/// Construction record carried alongside the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMeta {
    pub kind: ChainKind,
    /// Gap parameter of the zig-zag family.
    pub m: u32,
    /// Base coupling `J` (rad/ns).
    pub j: f64,
    /// FST angle in radians; 0 when no deformation was applied.
    pub theta: f64,
}

/// Site frequencies and nearest-neighbour couplings of a 1D chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    meta: ChainMeta,
}

impl ChainSpec {
    /// A chain with arbitrary parameters; `couplings.len()` must be `frequencies.len() - 1`.
    pub fn custom(frequencies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        Self::with_meta(
            frequencies,
            couplings,
            ChainMeta {
                kind: ChainKind::Custom,
                m: 0,
                j: 0.0,
                theta: 0.0,
            },
        )
    }

    pub fn with_meta(frequencies: Vec<f64>, couplings: Vec<f64>, meta: ChainMeta) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidSize("a chain needs at least one site".into()));
        }
        if couplings.len() + 1 != frequencies.len() {
            return Err(Error::InvalidSize(format!(
                "{} sites need {} couplings, got {}",
                frequencies.len(),
                frequencies.len() - 1,
                couplings.len()
            )));
        }
        if frequencies.iter().chain(&couplings).any(|x| !x.is_finite()) {
            return Err(Error::Precondition("non-finite chain parameter".into()));
        }
        Ok(Self {
            frequencies,
            couplings,
            meta,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn meta(&self) -> ChainMeta {
        self.meta
    }

    /// Replace the parameters but keep the construction record.
    pub fn with_parameters(&self, frequencies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        Self::with_meta(frequencies, couplings, self.meta)
    }

    /// Add a constant to every site frequency (a global energy offset).
    pub fn offset(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.frequencies.iter_mut().for_each(|w| *w += delta);
        out
    }

    /// Largest violations of `ω_n = ω_{N+1-n}` and `J_n² = J_{N-n}²`.
    pub fn mirror_residuals(&self) -> (f64, f64) {
        let n = self.n_sites();
        let freq = (0..n)
            .map(|i| (self.frequencies[i] - self.frequencies[n - 1 - i]).abs())
            .fold(0.0, f64::max);
        let nc = self.couplings.len();
        let coup = (0..nc)
            .map(|i| (self.couplings[i].powi(2) - self.couplings[nc - 1 - i].powi(2)).abs())
            .fold(0.0, f64::max);
        (freq, coup)
    }

    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let (f, c) = self.mirror_residuals();
        let scale = self
            .frequencies
            .iter()
            .chain(&self.couplings)
            .fold(1e-300f64, |a, x| a.max(x.abs()));
        f <= tol * scale && c <= tol * scale * scale
    }

    pub fn to_document(&self) -> ChainDocument {
        ChainDocument {
            kind: self.meta.kind,
            n_sites: self.n_sites(),
            frequencies_mhz: self.frequencies.iter().map(|&w| round6(angular_to_mhz(w))).collect(),
            couplings_mhz: self.couplings.iter().map(|&c| round6(angular_to_mhz(c))).collect(),
            m: self.meta.m,
            j_mhz: round6(angular_to_mhz(self.meta.j)),
            theta_rad: self.meta.theta,
        }
    }

    pub fn from_document(doc: &ChainDocument) -> Result<Self> {
        if doc.frequencies_mhz.len() != doc.n_sites {
            return Err(Error::InvalidSize(format!(
                "n_sites = {} but {} frequencies given",
                doc.n_sites,
                doc.frequencies_mhz.len()
            )));
        }
        Self::with_meta(
            doc.frequencies_mhz.iter().map(|&f| mhz_to_angular(f)).collect(),
            doc.couplings_mhz.iter().map(|&f| mhz_to_angular(f)).collect(),
            ChainMeta {
                kind: doc.kind,
                m: doc.m,
                j: mhz_to_angular(doc.j_mhz),
                theta: doc.theta_rad,
            },
        )
    }
}

/// JSON form of a [`ChainSpec`]; frequencies and couplings in MHz, 6 decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDocument {
    pub kind: ChainKind,
    pub n_sites: usize,
    pub frequencies_mhz: Vec<f64>,
    pub couplings_mhz: Vec<f64>,
    pub m: u32,
    pub j_mhz: f64,
    pub theta_rad: f64,
}

fn check_coupling(j: f64) -> Result<()> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::Precondition(format!("base coupling must be positive, got {j}")));
    }
    Ok(())
}

/// Uniform chain with `ω_n = 0` and `J_n = (J/2)·sqrt(n(N-n))`.
pub fn build_line(n_sites: usize, j: f64) -> Result<ChainSpec> {
    if n_sites < 2 {
        return Err(Error::InvalidSize(format!("line needs N >= 2, got {n_sites}")));
    }
    check_coupling(j)?;
    let n = n_sites as f64;
    let couplings = (1..n_sites)
        .map(|k| {
            let k = k as f64;
            0.5 * j * (k * (n - k)).sqrt()
        })
        .collect();
    Ok(ChainSpec {
        frequencies: vec![0.0; n_sites],
        couplings,
        meta: ChainMeta {
            kind: ChainKind::Line,
            m: 0,
            j,
            theta: 0.0,
        },
    })
}

fn is_odd(n: usize) -> bool {
    n % 2 == 1
}

/// Zig-zag chain: even sites detuned by `2mJ`,
/// `J_n = (J/2)·sqrt((n + μ_n·2m)(N - n + μ_{n+1}·2m))` with `μ_n = 1` for odd `n`.
///
/// `m = 0` returns exactly [`build_line`].
pub fn build_zigzag(n_sites: usize, m: u32, j: f64) -> Result<ChainSpec> {
    if !is_odd(n_sites) {
        return Err(Error::UnsupportedParity(format!(
            "zig-zag chains need odd N, got {n_sites}"
        )));
    }
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("zig-zag needs N >= 3, got {n_sites}")));
    }
    check_coupling(j)?;
    if m == 0 {
        return build_line(n_sites, j);
    }
    let gap = 2.0 * m as f64;
    let mu = |site: usize| if is_odd(site) { 1.0 } else { 0.0 };
    let n = n_sites as f64;
    let frequencies = (1..=n_sites)
        .map(|site| if is_odd(site) { 0.0 } else { gap * j })
        .collect();
    let couplings = (1..n_sites)
        .map(|site| {
            let k = site as f64;
            let left = k + mu(site) * gap;
            let right = n - k + mu(site + 1) * gap;
            0.5 * j * (left * right).sqrt()
        })
        .collect();
    Ok(ChainSpec {
        frequencies,
        couplings,
        meta: ChainMeta {
            kind: ChainKind::Zigzag,
            m,
            j,
            theta: 0.0,
        },
    })
}

/// Isospectral deformation turning a mirror-symmetric PST chain into an FST chain.
///
/// Odd `N`: the two couplings around the centre site are scaled by `cosθ ± sinθ`.
/// Even `N`: the central coupling is scaled by `cos2θ` and the two central
/// frequencies are split by `∓ sin2θ·J_{N/2}`.
pub fn apply_fst_deformation(spec: &ChainSpec, theta: f64) -> Result<ChainSpec> {
    let n = spec.n_sites();
    if n < 2 {
        return Err(Error::InvalidSize("FST needs at least two sites".into()));
    }
    if !spec.is_mirror_symmetric(1e-12) {
        let (f, c) = spec.mirror_residuals();
        return Err(Error::Precondition(format!(
            "chain is not mirror symmetric (frequency residual {f:e}, coupling residual {c:e})"
        )));
    }
    let mut frequencies = spec.frequencies.clone();
    let mut couplings = spec.couplings.clone();
    let (s, c) = theta.sin_cos();
    if is_odd(n) {
        // 1-based couplings (N-1)/2 and (N+1)/2 → 0-based (N-3)/2 and (N-1)/2.
        let left = (n - 3) / 2;
        couplings[left] *= c + s;
        couplings[left + 1] *= c - s;
    } else {
        let mid = n / 2 - 1; // 0-based index of J_{N/2}
        let jm = couplings[mid];
        let w = frequencies[mid];
        let (s2, c2) = (2.0 * theta).sin_cos();
        couplings[mid] = c2 * jm;
        frequencies[mid] = w - s2 * jm;
        frequencies[mid + 1] = w + s2 * jm;
    }
    Ok(ChainSpec {
        frequencies,
        couplings,
        meta: ChainMeta {
            kind: ChainKind::Fst,
            theta,
            ..spec.meta
        },
    })
}

/// Odd-site chain obtained from the zig-zag model as `m → ∞`: `(N+1)/2` sites at
/// `-J(N-1)/4` with couplings `-(J/2)·sqrt(n'((N+1)/2 - n'))`.
pub fn build_effective_limit(n_sites: usize, j: f64) -> Result<ChainSpec> {
    if !is_odd(n_sites) {
        return Err(Error::UnsupportedParity(format!(
            "effective limit needs odd N, got {n_sites}"
        )));
    }
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("effective limit needs N >= 3, got {n_sites}")));
    }
    check_coupling(j)?;
    let half = (n_sites + 1) / 2;
    let h = half as f64;
    let frequencies = vec![-j * (n_sites as f64 - 1.0) / 4.0; half];
    let couplings = (1..half)
        .map(|k| {
            let k = k as f64;
            -0.5 * j * (k * (h - k)).sqrt()
        })
        .collect();
    Ok(ChainSpec {
        frequencies,
        couplings,
        meta: ChainMeta {
            kind: ChainKind::Effective,
            m: 0,
            j,
            theta: 0.0,
        },
    })
}

/// Site-local sign flips `|n⟩ → s_n|n⟩`; coupling `J_n` picks up `s_n·s_{n+1}`.
///
/// Populations are invariant under this gauge transform.
pub fn gauge_transform(spec: &ChainSpec, signs: &[bool]) -> Result<ChainSpec> {
    if signs.len() != spec.n_sites() {
        return Err(Error::InvalidSize(format!(
            "{} signs for {} sites",
            signs.len(),
            spec.n_sites()
        )));
    }
    let couplings = spec
        .couplings
        .iter()
        .enumerate()
        .map(|(k, &c)| if signs[k] != signs[k + 1] { -c } else { c })
        .collect();
    spec.with_parameters(spec.frequencies.clone(), couplings)
}

/// A rectangular grid whose Hamiltonian is the Kronecker sum of two chains.
///
/// Site `(r, c)` (0-based) has index `r·cols + c`, frequency
/// `col_chain.ω_r + row_chain.ω_c`; horizontal bonds carry `row_chain.J_c`,
/// vertical bonds `col_chain.J_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    rows: usize,
    cols: usize,
    /// Chain along x, length `cols`.
    row_chain: ChainSpec,
    /// Chain along y, length `rows`.
    col_chain: ChainSpec,
}

impl LatticeSpec {
    pub fn new(row_chain: ChainSpec, col_chain: ChainSpec) -> Self {
        Self {
            rows: col_chain.n_sites(),
            cols: row_chain.n_sites(),
            row_chain,
            col_chain,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn row_chain(&self) -> &ChainSpec {
        &self.row_chain
    }

    pub fn col_chain(&self) -> &ChainSpec {
        &self.col_chain
    }

    pub fn site_index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn site_frequency(&self, r: usize, c: usize) -> f64 {
        self.col_chain.frequencies[r] + self.row_chain.frequencies[c]
    }

    /// Corner site indices: top-left, top-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [usize; 4] {
        [
            self.site_index(0, 0),
            self.site_index(0, self.cols - 1),
            self.site_index(self.rows - 1, 0),
            self.site_index(self.rows - 1, self.cols - 1),
        ]
    }

    /// Bonds as `(a, b, coupling)`: all horizontal bonds row by row, then all vertical bonds.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols - 1 {
                out.push((self.site_index(r, c), self.site_index(r, c + 1), self.row_chain.couplings[c]));
            }
        }
        for r in 0..self.rows - 1 {
            for c in 0..self.cols {
                out.push((self.site_index(r, c), self.site_index(r + 1, c), self.col_chain.couplings[r]));
            }
        }
        out
    }

    pub fn site_frequencies(&self) -> Vec<f64> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| self.site_frequency(r, c))
            .collect()
    }

    pub fn to_document(&self) -> LatticeDocument {
        let meta = self.row_chain.meta;
        LatticeDocument {
            kind: "lattice".into(),
            rows: self.rows,
            cols: self.cols,
            frequencies_mhz: self
                .site_frequencies()
                .into_iter()
                .map(|w| round6(angular_to_mhz(w)))
                .collect(),
            couplings_mhz: self
                .bonds()
                .into_iter()
                .map(|(_, _, c)| round6(angular_to_mhz(c)))
                .collect(),
            m: meta.m,
            j_mhz: round6(angular_to_mhz(meta.j)),
            theta_rad: meta.theta,
            row_chain: self.row_chain.to_document(),
            col_chain: self.col_chain.to_document(),
        }
    }
}

/// JSON form of a [`LatticeSpec`]. Site values are row-major, bond values
/// follow [`LatticeSpec::bonds`]; the two generating chains are embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDocument {
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
    pub frequencies_mhz: Vec<f64>,
    pub couplings_mhz: Vec<f64>,
    pub m: u32,
    pub j_mhz: f64,
    pub theta_rad: f64,
    pub row_chain: ChainDocument,
    pub col_chain: ChainDocument,
}

/// Grid of zig-zag (or, for `m = 0`, line) chains, optionally FST-deformed along both axes.
pub fn build_lattice(rows: usize, cols: usize, m: u32, j: f64, theta: Option<f64>) -> Result<LatticeSpec> {
    let chain = |len: usize| -> Result<ChainSpec> {
        let base = if m == 0 { build_line(len, j)? } else { build_zigzag(len, m, j)? };
        match theta {
            Some(t) => apply_fst_deformation(&base, t),
            None => Ok(base),
        }
    };
    Ok(LatticeSpec::new(chain(cols)?, chain(rows)?))
}
