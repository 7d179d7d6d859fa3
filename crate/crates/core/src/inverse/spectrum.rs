//! Fourier magnitudes of indicator functions and detection of the dominant character.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Character, GridGroup, GroupSet};

/// Magnitudes below this are treated as numerically zero.
pub const FLAT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub freq: Vec<usize>,
    /// `|Σ_{x ∈ A} e(-φ(x))| / N`.
    pub magnitude: f64,
}

/// Full DFT magnitudes of `1_A`, indexed like group elements (row-major frequency vectors).
#[derive(Clone, Debug)]
pub struct Spectrum {
    group: GridGroup,
    magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn group(&self) -> &GridGroup {
        &self.group
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn magnitude(&self, freq_index: usize) -> f64 {
        self.magnitudes[freq_index]
    }

    pub fn magnitude_of(&self, chi: &Character) -> f64 {
        self.magnitudes[self.group.index(chi.freq())]
    }

    pub fn entries(&self) -> Vec<SpectrumEntry> {
        self.magnitudes
            .iter()
            .enumerate()
            .map(|(i, &magnitude)| SpectrumEntry { freq: self.group.coords(i), magnitude })
            .collect()
    }

    /// `Σ_ξ |1̂_A(ξ)|²`, equal to `μ(A)` up to rounding.
    pub fn plancherel_sum(&self) -> f64 {
        self.magnitudes.iter().map(|m| m * m).sum()
    }

    /// Columns `xi_0, ..., xi_{d-1}, magnitude`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.group.rank()).map(|i| format!("xi_{i}")).collect();
        header.push("magnitude".into());
        w.write_record(&header)?;
        for (i, m) in self.magnitudes.iter().enumerate() {
            let mut row: Vec<String> = self.group.coords(i).iter().map(|c| c.to_string()).collect();
            row.push(format!("{m:.12e}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn spectrum(a: &GroupSet) -> Spectrum {
    let group = a.group().clone();
    let n = group.size();
    let mut data: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); n];
    for x in a.iter() {
        data[x].re = 1.0;
    }
    let mut planner = FftPlanner::<f64>::new();
    let dims = group.dims().to_vec();
    let mut stride = n;
    for &len in &dims {
        stride /= len;
        let fft = planner.plan_fft_forward(len);
        if stride == 1 {
            fft.process(&mut data);
            continue;
        }
        let mut line = vec![Complex::new(0.0, 0.0); len];
        let block = stride * len;
        for base in (0..n).step_by(block) {
            for offset in 0..stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + offset + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + offset + j * stride] = *v;
                }
            }
        }
    }
    let scale = 1.0 / n as f64;
    Spectrum { group, magnitudes: data.iter().map(|c| c.norm() * scale).collect() }
}

/// `N^{-1} Σ_{x ∈ A} e^{-2πi φ(x)}` by direct summation.
pub fn fourier_coefficient(a: &GroupSet, chi: &Character) -> Complex<f64> {
    let l = chi.order() as f64;
    let sum: Complex<f64> = a
        .iter()
        .map(|x| Complex::from_polar(1.0, -std::f64::consts::TAU * chi.eval(x) as f64 / l))
        .sum();
    sum / a.group().size() as f64
}

#[derive(Clone, Debug, Serialize)]
pub struct Detection {
    /// Canonical representative of the winning class `{ξ, -ξ}`.
    pub entry: SpectrumEntry,
    pub order: usize,
    /// Magnitude below half of `μ(C)`.
    pub weak: bool,
}

impl Detection {
    pub fn character(&self, group: &GridGroup) -> Character {
        let freq: Vec<i64> = self.entry.freq.iter().map(|&f| f as i64).collect();
        Character::new(group, &freq).expect("frequency taken from the group")
    }
}

/// Nonzero class `{ξ, -ξ}` of largest magnitude; ties go to the smaller order, then to the
/// lexicographically smaller canonical frequency.
pub fn detect_character(c: &GroupSet) -> Result<Detection> {
    if c.is_empty() {
        return Err(Error::EmptySet("detection input"));
    }
    if c.is_full() {
        return Err(Error::FlatSpectrum);
    }
    let spec = spectrum(c);
    detect_in_spectrum(&spec, c.len())
}

pub(crate) fn detect_in_spectrum(spec: &Spectrum, size: usize) -> Result<Detection> {
    let group = spec.group();
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    for (i, &m) in spec.magnitudes().iter().enumerate().skip(1) {
        let freq = group.coords(i);
        let neg: Vec<usize> = freq.iter().zip(group.dims()).map(|(&f, &n)| (n - f) % n).collect();
        if neg < freq {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bm, bo, bf)) => {
                if m > bm + FLAT_THRESHOLD {
                    true
                } else if m + FLAT_THRESHOLD < *bm {
                    false
                } else {
                    let order = order_of(group, &freq);
                    (order, &freq) < (*bo, bf)
                }
            }
        };
        if better {
            let order = order_of(group, &freq);
            best = Some((m, order, freq));
        }
    }
    let (magnitude, order, freq) = best.ok_or(Error::FlatSpectrum)?;
    if magnitude <= FLAT_THRESHOLD {
        return Err(Error::FlatSpectrum);
    }
    let mu = size as f64 / group.size() as f64;
    Ok(Detection { entry: SpectrumEntry { freq, magnitude }, order, weak: magnitude < 0.5 * mu })
}

fn order_of(group: &GridGroup, freq: &[usize]) -> usize {
    let f: Vec<i64> = freq.iter().map(|&x| x as i64).collect();
    Character::new(group, &f).expect("frequency taken from the group").order()
}
