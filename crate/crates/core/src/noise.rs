//! Two-sided Wiener paths per spectral mode and the shift group.
//!
//! A [`NoisePath`] stores cumulative Brownian values on an absolute integer
//! grid together with the index of its time origin. Relative values are
//! `W[origin + k] - W[origin]`, so shifting only moves the origin: the group
//! law holds exactly, increments are bitwise identical after any shift, and
//! every shifted path vanishes at its own origin.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{divides, grid_index};
use crate::rng::{derive_seed, fill_normals};
use crate::systems::state::StateVector;

/// Default spectral data: `b_j = j^{-decay}` and `λ_j = j²`.
pub fn default_spectrum(modes: usize, decay: f64) -> (Vec<f64>, Vec<f64>) {
    let b = (1..=modes).map(|j| (j as f64).powf(-decay)).collect();
    let lambda = (1..=modes).map(|j| (j * j) as f64).collect();
    (b, lambda)
}

#[derive(Clone, Debug)]
pub struct NoisePath {
    seed: u64,
    dt: f64,
    /// Absolute grid index of `values[.][0]`.
    first: i64,
    /// Absolute grid index of relative time zero.
    origin: i64,
    values: Arc<Vec<Vec<f64>>>,
    b: Arc<[f64]>,
    lambda: Arc<[f64]>,
}

fn check_spectrum(b: &[f64], lambda: &[f64]) -> Result<()> {
    if b.is_empty() {
        return Err(Error::Config("noise path needs at least one mode".into()));
    }
    if b.len() != lambda.len() {
        return Err(Error::Config(format!(
            "b has {} entries but lambda has {}",
            b.len(),
            lambda.len()
        )));
    }
    if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Config("noise amplitudes must be finite and non-negative".into()));
    }
    if lambda.iter().any(|l| !(l.is_finite() && *l > 0.0))
        || lambda.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Config("eigenvalues must be positive and strictly increasing".into()));
    }
    Ok(())
}

impl NoisePath {
    /// Samples a path on `[t_min, t_max]` with independent `N(0, dt)` increments.
    ///
    /// Increment `k` of mode `j` (covering `[(k-1)dt, k dt]`) is the normal
    /// addressed by `(seed, j, k)`.
    pub fn sample(
        seed: u64,
        window: (f64, f64),
        dt: f64,
        modes: usize,
        b: &[f64],
        lambda: &[f64],
    ) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Config("J must be at least 1".into()));
        }
        if b.len() != modes {
            return Err(Error::Config(format!("expected {modes} amplitudes, got {}", b.len())));
        }
        check_spectrum(b, lambda)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        let (t_min, t_max) = window;
        if !(t_min < 0.0 && 0.0 < t_max) {
            return Err(Error::Config(format!(
                "window [{t_min}, {t_max}] must contain 0 in its interior"
            )));
        }
        let lo = grid_index(t_min, dt).map_err(|_| {
            Error::Config(format!("window start {t_min} is not a multiple of dt = {dt}"))
        })?;
        let hi = grid_index(t_max, dt).map_err(|_| {
            Error::Config(format!("window end {t_max} is not a multiple of dt = {dt}"))
        })?;
        let len = (hi - lo + 1) as usize;
        let zero = (-lo) as usize;
        let sq = dt.sqrt();
        let mut values = Vec::with_capacity(modes);
        let mut xi = vec![0.0; len - 1];
        for j in 0..modes {
            fill_normals(seed, j as u64, lo + 1, &mut xi);
            let mut w = vec![0.0; len];
            for i in zero + 1..len {
                w[i] = w[i - 1] + sq * xi[i - 1];
            }
            for i in (0..zero).rev() {
                w[i] = w[i + 1] - sq * xi[i];
            }
            values.push(w);
        }
        Ok(NoisePath {
            seed,
            dt,
            first: lo,
            origin: 0,
            values: Arc::new(values),
            b: b.into(),
            lambda: lambda.into(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn modes(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_arc(&self) -> Arc<[f64]> {
        self.lambda.clone()
    }

    fn len(&self) -> usize {
        self.values[0].len()
    }

    fn last(&self) -> i64 {
        self.first + self.len() as i64 - 1
    }

    /// Relative grid indices `(lo, hi)` covered by the stored samples.
    pub fn index_window(&self) -> (i64, i64) {
        (self.first - self.origin, self.last() - self.origin)
    }

    /// Covered time window relative to this path's origin.
    pub fn window(&self) -> (f64, f64) {
        let (lo, hi) = self.index_window();
        (lo as f64 * self.dt, hi as f64 * self.dt)
    }

    /// Errors unless `[lo, hi]` lies within the window.
    pub fn require(&self, lo: f64, hi: f64) -> Result<()> {
        let (a, b) = self.window();
        let slack = 1e-9 * self.dt;
        if lo < a - slack || hi > b + slack {
            return Err(Error::window((lo, hi), (a, b)));
        }
        Ok(())
    }

    /// Absolute index for relative index `k`, checked against the window.
    fn abs_index(&self, k: i64) -> Result<usize> {
        let a = self.origin + k;
        if a < self.first || a > self.last() {
            let t = k as f64 * self.dt;
            return Err(Error::window((t, t), self.window()));
        }
        Ok((a - self.first) as usize)
    }

    /// `β_j(k dt)` for relative grid index `k` (mode is 0-based).
    pub fn value_at_index(&self, mode: usize, k: i64) -> Result<f64> {
        let i = self.abs_index(k)?;
        let o = (self.origin - self.first) as usize;
        Ok(self.values[mode][i] - self.values[mode][o])
    }

    /// `β_j(t)` for grid-aligned `t` (mode is 0-based).
    pub fn value(&self, mode: usize, t: f64) -> Result<f64> {
        self.value_at_index(mode, grid_index(t, self.dt)?)
    }

    /// Increment over `[(k-1)dt, k dt]` in relative indices.
    ///
    /// Read from the stored cumulative array, so it does not depend on the origin.
    pub fn increment(&self, mode: usize, k: i64) -> Result<f64> {
        let i = self.abs_index(k)?;
        if i == 0 {
            let t = (k - 1) as f64 * self.dt;
            return Err(Error::window((t, t), self.window()));
        }
        Ok(self.values[mode][i] - self.values[mode][i - 1])
    }

    /// `θ_τ ω`: the path `s ↦ ω(τ + s) − ω(τ)`.
    pub fn shift(&self, tau: f64) -> Result<NoisePath> {
        let k = grid_index(tau, self.dt)?;
        self.abs_index(k)?;
        let mut p = self.clone();
        p.origin += k;
        Ok(p)
    }

    /// Shift that also checks a caller-declared working interval in the new frame.
    pub fn shift_covering(&self, tau: f64, need: (f64, f64)) -> Result<NoisePath> {
        let p = self.shift(tau)?;
        p.require(need.0, need.1)?;
        Ok(p)
    }

    /// Spatially regular noise coefficients `(b_j β_j(t))_j`.
    pub fn zeta_at(&self, t: f64) -> Result<StateVector> {
        let k = grid_index(t, self.dt)?;
        let coeffs = (0..self.modes())
            .map(|j| self.value_at_index(j, k).map(|w| self.b[j] * w))
            .collect::<Result<Vec<_>>>()?;
        Ok(StateVector::new(coeffs, self.lambda.clone()))
    }

    /// `B₃ = Σ λ_j³ b_j²`.
    pub fn b3(&self) -> f64 {
        self.b
            .iter()
            .zip(self.lambda.iter())
            .map(|(b, l)| l.powi(3) * b * b)
            .sum()
    }

    /// Same path with different amplitudes (increments are shared).
    pub fn with_amplitudes(&self, b: &[f64]) -> Result<NoisePath> {
        check_spectrum(b, &self.lambda)?;
        let mut p = self.clone();
        p.b = b.into();
        Ok(p)
    }

    /// Brownian-bridge refinement onto the grid of step `new_dt`.
    ///
    /// Knots of the current grid are copied bitwise. Fine point `i` of the
    /// coarse interval ending at absolute index `k` uses the normal addressed by
    /// `(seed', mode, (k-1) m + i)` with `seed'` derived from the seed and `m`.
    pub fn refine(&self, new_dt: f64) -> Result<NoisePath> {
        let m = divides(new_dt, self.dt).ok_or_else(|| {
            Error::Config(format!("new dt {new_dt} does not divide dt = {}", self.dt))
        })?;
        if m == 1 {
            return Ok(self.clone());
        }
        let bridge_seed = derive_seed(self.seed, &format!("bridge/{m}"));
        let h = self.dt / m as f64;
        let n = self.len();
        let fine_len = (n - 1) * m + 1;
        let mut values = Vec::with_capacity(self.modes());
        let mut z = vec![0.0; m - 1];
        for (j, w) in self.values.iter().enumerate() {
            let mut f = vec![0.0; fine_len];
            f[0] = w[0];
            for c in 1..n {
                let k = self.first + c as i64;
                let base = (c - 1) * m;
                fill_normals(bridge_seed, j as u64, (k - 1) * m as i64 + 1, &mut z);
                let end = w[c];
                let mut x = w[c - 1];
                for i in 1..m {
                    let rem = (m - i + 1) as f64;
                    let mean = x + (end - x) / rem;
                    let var = h * (rem - 1.0) / rem;
                    x = mean + var.sqrt() * z[i - 1];
                    f[base + i] = x;
                }
                f[base + m] = end;
            }
            values.push(f);
        }
        Ok(NoisePath {
            seed: self.seed,
            dt: h,
            first: self.first * m as i64,
            origin: self.origin * m as i64,
            values: Arc::new(values),
            b: self.b.clone(),
            lambda: self.lambda.clone(),
        })
    }

    /// Writes the textual dump: header line, then `t, β_1, …, β_J` per grid point.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let (tmin, tmax) = self.window();
        writeln!(
            out,
            "#noisepath v1 seed={} tmin={} tmax={} dt={} J={}",
            self.seed,
            tmin,
            tmax,
            self.dt,
            self.modes()
        )?;
        let (lo, hi) = self.index_window();
        let mut line = String::new();
        for k in lo..=hi {
            line.clear();
            line.push_str(&format!("{:.16e}", k as f64 * self.dt));
            for j in 0..self.modes() {
                line.push_str(&format!(",{:.16e}", self.value_at_index(j, k)?));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    /// Restores a dump; amplitudes and eigenvalues are not part of the format.
    pub fn read_text<R: BufRead>(input: R, b: &[f64], lambda: &[f64]) -> Result<NoisePath> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or(Error::EmptyInput("noise path dump"))??;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#noisepath") || fields.next() != Some("v1") {
            return Err(Error::Parse(format!("bad noise path header: {header}")));
        }
        let mut get = |key: &str| -> Result<String> {
            let f = fields
                .next()
                .ok_or_else(|| Error::Parse(format!("missing header field {key}")))?;
            f.strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("expected {key}=…, found {f}")))
        };
        let num = |s: String| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")))
        };
        let seed = get("seed")?
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("seed: {e}")))?;
        let tmin = num(get("tmin")?)?;
        let tmax = num(get("tmax")?)?;
        let dt = num(get("dt")?)?;
        let modes = get("J")?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("J: {e}")))?;
        if modes == 0 || b.len() != modes {
            return Err(Error::Config(format!(
                "dump has J = {modes} but {} amplitudes were supplied",
                b.len()
            )));
        }
        check_spectrum(b, lambda)?;
        let lo = grid_index(tmin, dt)?;
        let hi = grid_index(tmax, dt)?;
        if !(lo <= 0 && 0 <= hi) {
            return Err(Error::Parse("dump window does not contain 0".into()));
        }
        let mut values = vec![Vec::with_capacity((hi - lo + 1) as usize); modes];
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            cols.next();
            for (j, col) in values.iter_mut().enumerate() {
                let c = cols
                    .next()
                    .ok_or_else(|| Error::Parse(format!("row has fewer than {} values", j + 1)))?;
                col.push(num(c.trim().to_owned())?);
            }
        }
        if values[0].len() as i64 != hi - lo + 1 {
            return Err(Error::Parse(format!(
                "expected {} rows, found {}",
                hi - lo + 1,
                values[0].len()
            )));
        }
        Ok(NoisePath {
            seed,
            dt,
            first: lo,
            origin: 0,
            values: Arc::new(values),
            b: b.into(),
            lambda: lambda.into(),
        })
    }
}
