//! Far-field azimuth patterns and antenna array geometry.
//!
//! A pattern is a complex voltage gain `g(phi)` over the azimuth angle
//! `phi` (radians, wrapped into `[0, 2*pi)`). The analytic kinds cover the
//! usual suspects; measured patterns come in as tabulated samples with
//! complex-linear interpolation between nodes and wraparound across the
//! `0 / 2*pi` seam.
//!
//! Tabulated patterns round-trip through CSV files with the header
//! `phi_deg,mag,phase_deg`, angles in degrees by human convention, `#`
//! comment lines allowed. The polar-degree rows of the file are the
//! canonical representation: evaluation nodes in radians/complex form are
//! derived from them exactly once, so a save-then-load reproduces every
//! sample bit for bit.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::AcnError;
use crate::util::{wrap_pm_pi, wrap_tau};
use crate::Result;

/// A far-field azimuth pattern: complex voltage gain versus angle of arrival.
///
/// All kinds are `2*pi`-periodic and finite everywhere. The checked
/// constructors ([`FarFieldPattern::cardioid`], [`FarFieldPattern::patch_lobe`])
/// validate parameter ranges; building a variant directly with parameters
/// outside the documented ranges is a contract violation.
#[derive(Debug, Clone, PartialEq)]
pub enum FarFieldPattern {
    /// Unit gain in every direction.
    Isotropic,
    /// `g(phi) = cos(phi - pointing)`: figure-eight dipole pattern.
    DipoleCosine {
        /// Boresight angle in radians.
        pointing: f64,
    },
    /// `g(phi) = (1 - depth) + depth * cos(phi - pointing)`.
    ///
    /// `depth = 0` degenerates to isotropic, `depth = 1/2` is the classic
    /// cardioid with a null at the back, `depth = 1` a figure-eight.
    Cardioid {
        /// Boresight angle in radians.
        pointing: f64,
        /// Pattern depth in `[0, 1]`.
        depth: f64,
    },
    /// Patch-style main lobe: raised-cosine power shape with unit boresight
    /// gain, the requested half-power beamwidth, and a flat back-lobe floor.
    PatchLobe {
        /// Boresight angle in radians.
        pointing: f64,
        /// Half-power beamwidth in radians, in `(0, 2*pi)`.
        beamwidth: f64,
        /// Back-lobe voltage gain in `[0, 1/sqrt(2))`.
        back_lobe: f64,
    },
    /// Interpolated measurement table; see [`TabulatedPattern`].
    Tabulated(TabulatedPattern),
}

impl FarFieldPattern {
    /// Checked constructor for [`FarFieldPattern::Cardioid`].
    pub fn cardioid(pointing: f64, depth: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&depth) || !depth.is_finite() {
            return Err(AcnError::InvalidPattern(format!(
                "cardioid depth {depth} outside [0, 1]"
            )));
        }
        Ok(Self::Cardioid { pointing, depth })
    }

    /// Checked constructor for [`FarFieldPattern::PatchLobe`].
    ///
    /// Requires `0 < beamwidth < 2*pi` and `0 <= back_lobe < 1/sqrt(2)` (the
    /// half-power level must sit above the back-lobe floor).
    pub fn patch_lobe(pointing: f64, beamwidth: f64, back_lobe: f64) -> Result<Self> {
        if !(beamwidth > 0.0 && beamwidth < TAU) {
            return Err(AcnError::InvalidPattern(format!(
                "patch beamwidth {beamwidth} outside (0, 2*pi)"
            )));
        }
        if !(0.0..FRAC_1_SQRT_2).contains(&back_lobe) {
            return Err(AcnError::InvalidPattern(format!(
                "patch back lobe {back_lobe} outside [0, 1/sqrt(2))"
            )));
        }
        Ok(Self::PatchLobe {
            pointing,
            beamwidth,
            back_lobe,
        })
    }

    /// Evaluates the complex gain at azimuth `phi` (radians, any value;
    /// wrapped into `[0, 2*pi)`).
    pub fn evaluate(&self, phi: f64) -> Complex64 {
        let phi = wrap_tau(phi);
        match *self {
            Self::Isotropic => Complex64::new(1.0, 0.0),
            Self::DipoleCosine { pointing } => Complex64::new((phi - pointing).cos(), 0.0),
            Self::Cardioid { pointing, depth } => {
                Complex64::new((1.0 - depth) + depth * (phi - pointing).cos(), 0.0)
            }
            Self::PatchLobe {
                pointing,
                beamwidth,
                back_lobe,
            } => {
                // Raised-cosine shape b + (1-b) * cos(delta/2)^n with the
                // exponent n solved so the gain is 1/sqrt(2) at half beamwidth.
                let delta = wrap_pm_pi(phi - pointing);
                let n = (FRAC_1_SQRT_2 - back_lobe).ln() - (1.0 - back_lobe).ln();
                let n = n / (beamwidth / 4.0).cos().ln();
                let c = (delta / 2.0).cos();
                Complex64::new(back_lobe + (1.0 - back_lobe) * c.powf(n), 0.0)
            }
            Self::Tabulated(ref table) => table.interpolate(phi),
        }
    }

    /// Samples the pattern on a uniform `points`-point degree grid and
    /// returns the result as a tabulated pattern. Needs `points >= 2`.
    pub fn tabulate(&self, points: usize) -> Result<TabulatedPattern> {
        if points < 2 {
            return Err(AcnError::InvalidPattern(format!(
                "tabulation needs at least 2 points, got {points}"
            )));
        }
        let step = 360.0 / points as f64;
        let rows: Vec<(f64, f64, f64)> = (0..points)
            .map(|i| {
                let phi_deg = i as f64 * step;
                let g = self.evaluate(phi_deg.to_radians());
                (phi_deg, g.norm(), g.arg().to_degrees())
            })
            .collect();
        TabulatedPattern::from_polar_deg(rows)
    }

    /// Mean-square azimuth gain `(1/n) * sum |g(phi_i)|^2` over a uniform
    /// `points`-point grid. For smooth periodic patterns the uniform rule
    /// converges fast; 4096 points is plenty for every built-in kind.
    pub fn mean_square_gain(&self, points: usize) -> f64 {
        let n = points.max(1);
        let sum: f64 = (0..n)
            .map(|i| self.evaluate(i as f64 * TAU / n as f64).norm_sqr())
            .sum();
        sum / n as f64
    }

    /// Rescales the pattern so its mean-square azimuth gain is 1, returning a
    /// tabulated pattern sampled on a `points`-point grid.
    ///
    /// This is a 2-D (azimuth-only) proxy for full-pattern normalization: it
    /// says nothing about elevation behaviour and is meant for comparing
    /// azimuth cuts on an equal footing.
    pub fn normalize_mean_square(&self, points: usize) -> Result<FarFieldPattern> {
        let ms = self.mean_square_gain(points.max(1));
        if ms <= 0.0 || !ms.is_finite() {
            return Err(AcnError::InvalidPattern(format!(
                "cannot normalize pattern with mean-square gain {ms}"
            )));
        }
        let scale = 1.0 / ms.sqrt();
        let table = self.tabulate(points)?;
        let rows: Vec<(f64, f64, f64)> = table
            .rows
            .iter()
            .map(|r| (r.phi_deg, r.mag * scale, r.phase_deg))
            .collect();
        Ok(FarFieldPattern::Tabulated(TabulatedPattern::from_polar_deg(rows)?))
    }
}

/// One canonical sample of a tabulated pattern, exactly as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PolarRow {
    phi_deg: f64,
    mag: f64,
    phase_deg: f64,
}

/// A measured pattern: strictly increasing sample angles in `[0, 360)`
/// degrees with complex gains, interpolated complex-linearly (real and
/// imaginary parts separately) with wraparound between the last and first
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPattern {
    rows: Vec<PolarRow>,
    /// Evaluation nodes `(phi_rad, gain)` derived from `rows` once.
    nodes: Vec<(f64, Complex64)>,
}

impl TabulatedPattern {
    /// Builds a table from `(phi_deg, mag, phase_deg)` rows, the same triples
    /// the CSV format stores. Angles must be strictly increasing in
    /// `[0, 360)`; at least 2 rows are required.
    pub fn from_polar_deg(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let rows: Vec<PolarRow> = rows
            .into_iter()
            .map(|(phi_deg, mag, phase_deg)| PolarRow {
                phi_deg,
                mag,
                phase_deg,
            })
            .collect();
        if rows.len() < 2 {
            return Err(AcnError::InvalidPattern(format!(
                "tabulated pattern needs at least 2 samples, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if !(row.phi_deg.is_finite() && row.mag.is_finite() && row.phase_deg.is_finite()) {
                return Err(AcnError::InvalidPattern(format!(
                    "non-finite values in sample {i}"
                )));
            }
            if !(0.0..360.0).contains(&row.phi_deg) {
                return Err(AcnError::InvalidPattern(format!(
                    "sample angle {} deg outside [0, 360)",
                    row.phi_deg
                )));
            }
            if i > 0 && row.phi_deg <= rows[i - 1].phi_deg {
                return Err(AcnError::InvalidPattern(format!(
                    "sample angles must be strictly increasing ({} deg after {} deg)",
                    row.phi_deg,
                    rows[i - 1].phi_deg
                )));
            }
        }
        let nodes = rows
            .iter()
            .map(|r| {
                let gain = Complex64::from_polar(r.mag, r.phase_deg.to_radians());
                (r.phi_deg.to_radians(), gain)
            })
            .collect();
        Ok(Self { rows, nodes })
    }

    /// Builds a table from `(phi_rad, gain)` samples with strictly increasing
    /// angles in `[0, 2*pi)`. The samples are canonicalized to polar-degree
    /// rows, so gains may differ from the inputs by a last-ulp polar
    /// round trip.
    pub fn from_samples(samples: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let rows: Vec<(f64, f64, f64)> = samples
            .into_iter()
            .map(|(phi, g)| (phi.to_degrees(), g.norm(), g.arg().to_degrees()))
            .collect();
        Self::from_polar_deg(rows)
    }

    /// The evaluation nodes `(phi_rad, gain)` in ascending angle order.
    pub fn samples(&self) -> &[(f64, Complex64)] {
        &self.nodes
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Always false: construction requires at least 2 samples.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Complex-linear interpolation at `phi` already wrapped into `[0, 2*pi)`.
    ///
    /// Evaluation at a node angle returns that node's gain exactly (the
    /// interpolation weight degenerates to 0 there).
    fn interpolate(&self, phi: f64) -> Complex64 {
        let n = self.nodes.len();
        let idx = self.nodes.partition_point(|&(a, _)| a <= phi);
        let (i0, i1) = ((idx + n - 1) % n, idx % n);
        let (a0, g0) = self.nodes[i0];
        let (a1, g1) = self.nodes[i1];
        let span = if i1 > i0 { a1 - a0 } else { a1 + TAU - a0 };
        let offset = if phi >= a0 { phi - a0 } else { phi + TAU - a0 };
        let t = offset / span;
        g0 + (g1 - g0) * t
    }
}

/// An array of `L` antennas: per-element patterns, planar positions in
/// meters, and the carrier wavelength.
///
/// Element 0 is the phase reference: plane-wave phases and combining offsets
/// are all expressed relative to it.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    elements: Vec<FarFieldPattern>,
    positions: Vec<(f64, f64)>,
    wavelength: f64,
}

impl AntennaArray {
    /// Builds an array. `elements` and `positions` must have equal nonzero
    /// length and the wavelength must be positive.
    pub fn new(
        elements: Vec<FarFieldPattern>,
        positions: Vec<(f64, f64)>,
        wavelength: f64,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(AcnError::Config("array needs at least one element".into()));
        }
        if elements.len() != positions.len() {
            return Err(AcnError::Config(format!(
                "{} elements but {} positions",
                elements.len(),
                positions.len()
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(AcnError::Config(format!(
                "wavelength {wavelength} must be positive"
            )));
        }
        if let Some((x, y)) = positions.iter().find(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(AcnError::Config(format!("non-finite position ({x}, {y})")));
        }
        Ok(Self {
            elements,
            positions,
            wavelength,
        })
    }

    /// Number of antennas `L`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false: construction requires at least one element.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The element patterns in order.
    pub fn elements(&self) -> &[FarFieldPattern] {
        &self.elements
    }

    /// Element positions in meters.
    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    /// Carrier wavelength in meters.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// The pattern of element `l`. Panics if `l >= L`.
    pub fn element(&self, l: usize) -> &FarFieldPattern {
        &self.elements[l]
    }

    /// All element gains at azimuth `phi`.
    pub fn gains(&self, phi: f64) -> Vec<Complex64> {
        self.elements.iter().map(|e| e.evaluate(phi)).collect()
    }

    /// Plane-wave phase of element `l` relative to element 0 for a wave
    /// arriving from azimuth `phi`:
    ///
    /// `Omega_l(phi) = -(2*pi/lambda) * ((x_l - x_0) cos phi + (y_l - y_0) sin phi)`
    ///
    /// so `Omega_0 = 0` by construction. The sign places the reference at the
    /// phase origin with far elements lagging. Panics if `l >= L`.
    pub fn plane_wave_phase(&self, l: usize, phi: f64) -> f64 {
        let (x0, y0) = self.positions[0];
        let (xl, yl) = self.positions[l];
        -(TAU / self.wavelength) * ((xl - x0) * phi.cos() + (yl - y0) * phi.sin())
    }

    /// Plane-wave phases of all elements; see [`AntennaArray::plane_wave_phase`].
    pub fn plane_wave_phases(&self, phi: f64) -> Vec<f64> {
        (0..self.len()).map(|l| self.plane_wave_phase(l, phi)).collect()
    }
}

const CSV_HEADER: &str = "phi_deg,mag,phase_deg";

/// Reads a tabulated pattern from CSV text; see the module docs for the
/// format. Errors carry the offending 1-based line number.
pub fn read_pattern_csv<R: BufRead>(reader: R) -> Result<FarFieldPattern> {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut header_seen = false;
    let mut last_line = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split(',').map(str::trim).collect();
        if !header_seen {
            if fields != ["phi_deg", "mag", "phase_deg"] {
                return Err(AcnError::PatternParse {
                    line: line_no,
                    reason: format!("expected header `{CSV_HEADER}`, got `{text}`"),
                });
            }
            header_seen = true;
            continue;
        }
        if fields.len() != 3 {
            return Err(AcnError::PatternParse {
                line: line_no,
                reason: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let mut values = [0.0f64; 3];
        for (v, field) in values.iter_mut().zip(&fields) {
            *v = field.parse().map_err(|_| AcnError::PatternParse {
                line: line_no,
                reason: format!("`{field}` is not a number"),
            })?;
        }
        let (phi_deg, mag, phase_deg) = (values[0], values[1], values[2]);
        if !(0.0..360.0).contains(&phi_deg) {
            return Err(AcnError::PatternParse {
                line: line_no,
                reason: format!("angle {phi_deg} deg outside [0, 360)"),
            });
        }
        if let Some(&(prev, _, _)) = rows.last() {
            if phi_deg == prev {
                return Err(AcnError::PatternParse {
                    line: line_no,
                    reason: format!("duplicate angle {phi_deg} deg"),
                });
            }
            if phi_deg < prev {
                return Err(AcnError::PatternParse {
                    line: line_no,
                    reason: format!("angle {phi_deg} deg not increasing (previous {prev} deg)"),
                });
            }
        }
        rows.push((phi_deg, mag, phase_deg));
    }
    if !header_seen {
        return Err(AcnError::PatternParse {
            line: last_line.max(1),
            reason: "no header line found".into(),
        });
    }
    if rows.is_empty() {
        return Err(AcnError::PatternParse {
            line: last_line.max(1),
            reason: "no data rows".into(),
        });
    }
    Ok(FarFieldPattern::Tabulated(TabulatedPattern::from_polar_deg(
        rows,
    )?))
}

/// Loads a tabulated pattern from a CSV file; see [`read_pattern_csv`].
pub fn load_pattern_csv(path: impl AsRef<Path>) -> Result<FarFieldPattern> {
    read_pattern_csv(BufReader::new(File::open(path)?))
}

/// Writes a pattern as CSV text. Tabulated patterns write their stored rows
/// verbatim (so load(save(p)) reproduces every sample bit for bit); analytic
/// patterns are sampled on a 1-degree grid first.
pub fn write_pattern_csv<W: Write>(pattern: &FarFieldPattern, mut writer: W) -> Result<()> {
    let table;
    let rows = match pattern {
        FarFieldPattern::Tabulated(t) => &t.rows,
        other => {
            table = other.tabulate(360)?;
            &table.rows
        }
    };
    writeln!(writer, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(writer, "{},{},{}", row.phi_deg, row.mag, row.phase_deg)?;
    }
    Ok(())
}

/// Saves a pattern to a CSV file; see [`write_pattern_csv`].
pub fn save_pattern_csv(pattern: &FarFieldPattern, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_pattern_csv(pattern, &mut writer)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn isotropic_is_unit_everywhere() {
        let p = FarFieldPattern::Isotropic;
        for i in 0..8 {
            let phi = i as f64 * TAU / 8.0;
            assert_eq!(p.evaluate(phi), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn dipole_null_at_broadside() {
        let p = FarFieldPattern::DipoleCosine { pointing: 0.0 };
        assert!(p.evaluate(FRAC_PI_2).norm() < 1e-15);
        assert!(close(p.evaluate(0.0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(p.evaluate(PI), Complex64::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn cardioid_depth_controls_back_level() {
        let p = FarFieldPattern::cardioid(0.0, 0.5).unwrap();
        assert!(close(p.evaluate(0.0), Complex64::new(1.0, 0.0), 1e-15));
        assert!(p.evaluate(PI).norm() < 1e-15);
        assert!(FarFieldPattern::cardioid(0.0, 1.5).is_err());
    }

    #[test]
    fn patch_hits_half_power_at_half_beamwidth() {
        let p = FarFieldPattern::patch_lobe(0.0, FRAC_PI_2, 0.1).unwrap();
        assert!(close(p.evaluate(0.0), Complex64::new(1.0, 0.0), 1e-12));
        for sign in [-1.0, 1.0] {
            let g = p.evaluate(sign * FRAC_PI_2 / 2.0);
            assert!(
                (g.norm_sqr() - 0.5).abs() < 1e-12,
                "half-power point off: |g|^2 = {}",
                g.norm_sqr()
            );
        }
        let back = p.evaluate(PI);
        assert!((back.re - 0.1).abs() < 1e-12);
        assert!(FarFieldPattern::patch_lobe(0.0, 0.0, 0.1).is_err());
        assert!(FarFieldPattern::patch_lobe(0.0, FRAC_PI_2, 0.8).is_err());
    }

    #[test]
    fn patterns_are_periodic() {
        let patterns = [
            FarFieldPattern::Isotropic,
            FarFieldPattern::DipoleCosine { pointing: 0.3 },
            FarFieldPattern::cardioid(1.0, 0.5).unwrap(),
            FarFieldPattern::patch_lobe(2.0, 1.2, 0.2).unwrap(),
        ];
        for p in &patterns {
            for i in 0..16 {
                let phi = i as f64 * TAU / 16.0;
                let d = (p.evaluate(phi) - p.evaluate(phi + TAU)).norm();
                assert!(d <= 1e-12, "periodicity violated by {d}");
            }
        }
    }

    #[test]
    fn tabulated_interpolates_between_nodes() {
        // Nodes at 0 and 90 degrees: gains 1 and j. Three quarters along,
        // the complex-linear interpolant is 0.25 + 0.75j.
        let t = TabulatedPattern::from_samples(vec![
            (0.0, Complex64::new(1.0, 0.0)),
            (FRAC_PI_2, Complex64::new(0.0, 1.0)),
        ])
        .unwrap();
        let p = FarFieldPattern::Tabulated(t);
        let g = p.evaluate(0.75 * FRAC_PI_2);
        assert!(close(g, Complex64::new(0.25, 0.75), 1e-12), "got {g}");
    }

    #[test]
    fn tabulated_exact_at_nodes() {
        let t = TabulatedPattern::from_samples(vec![
            (0.0, Complex64::new(1.0, 0.0)),
            (1.0, Complex64::new(0.2, -0.4)),
            (4.0, Complex64::new(-0.7, 0.1)),
        ])
        .unwrap();
        let nodes: Vec<_> = t.samples().to_vec();
        for (phi, g) in nodes {
            assert_eq!(t.interpolate(phi), g);
        }
    }

    #[test]
    fn tabulated_wraps_across_seam() {
        let t = TabulatedPattern::from_samples(vec![
            (0.1, Complex64::new(1.0, 0.0)),
            (TAU - 0.1, Complex64::new(0.0, 1.0)),
        ])
        .unwrap();
        let p = FarFieldPattern::Tabulated(t);
        // Halfway across the wrap segment (at exactly 0) the interpolant is
        // the midpoint of the two node gains.
        let g = p.evaluate(0.0);
        assert!(close(g, Complex64::new(0.5, 0.5), 1e-12), "got {g}");
        // Continuity across the seam: the two evaluation points are 2e-9 rad
        // apart on a segment with slope sqrt(2)/0.2 per rad, so the gap must
        // stay at the order of 1.4e-8.
        let d = (p.evaluate(1e-9) - p.evaluate(TAU - 1e-9)).norm();
        assert!(d <= 1e-7, "seam jump {d}");
    }

    #[test]
    fn tabulated_rejects_bad_tables() {
        assert!(matches!(
            TabulatedPattern::from_samples(vec![(0.0, Complex64::new(1.0, 0.0))]),
            Err(AcnError::InvalidPattern(_))
        ));
        assert!(TabulatedPattern::from_polar_deg(vec![
            (0.0, 1.0, 0.0),
            (0.0, 1.0, 0.0)
        ])
        .is_err());
        assert!(TabulatedPattern::from_polar_deg(vec![
            (10.0, 1.0, 0.0),
            (5.0, 1.0, 0.0)
        ])
        .is_err());
        assert!(TabulatedPattern::from_polar_deg(vec![
            (0.0, 1.0, 0.0),
            (361.0, 1.0, 0.0)
        ])
        .is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cardioid = FarFieldPattern::cardioid(0.7, 0.5).unwrap();
        let table = FarFieldPattern::Tabulated(cardioid.tabulate(360).unwrap());
        let mut buf = Vec::new();
        write_pattern_csv(&table, &mut buf).unwrap();
        let reloaded = read_pattern_csv(buf.as_slice()).unwrap();
        let (FarFieldPattern::Tabulated(a), FarFieldPattern::Tabulated(b)) = (&table, &reloaded)
        else {
            panic!("expected tabulated patterns");
        };
        assert_eq!(a.rows.len(), b.rows.len());
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra, rb);
        }
        for (na, nb) in a.samples().iter().zip(b.samples()) {
            assert_eq!(na.0.to_bits(), nb.0.to_bits());
            assert_eq!(na.1.re.to_bits(), nb.1.re.to_bits());
            assert_eq!(na.1.im.to_bits(), nb.1.im.to_bits());
        }
    }

    #[test]
    fn csv_save_of_analytic_pattern_samples_one_degree_grid() {
        let p = FarFieldPattern::DipoleCosine { pointing: 0.0 };
        let mut buf = Vec::new();
        write_pattern_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 361); // header + 360 rows
        assert!(text.starts_with("phi_deg,mag,phase_deg\n"));
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let missing_header = "0,1,0\n10,1,0\n";
        match read_pattern_csv(missing_header.as_bytes()) {
            Err(AcnError::PatternParse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }

        let bad_row = "phi_deg,mag,phase_deg\n0,1,0\n# note\n10,not_a_number,0\n";
        match read_pattern_csv(bad_row.as_bytes()) {
            Err(AcnError::PatternParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }

        let dup = "phi_deg,mag,phase_deg\n0,1,0\n0,2,0\n";
        match read_pattern_csv(dup.as_bytes()) {
            Err(AcnError::PatternParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        let out_of_range = "phi_deg,mag,phase_deg\n-1,1,0\n";
        match read_pattern_csv(out_of_range.as_bytes()) {
            Err(AcnError::PatternParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        assert!(read_pattern_csv("".as_bytes()).is_err());
        assert!(read_pattern_csv("phi_deg,mag,phase_deg\n".as_bytes()).is_err());
    }

    #[test]
    fn plane_wave_phase_matches_hand_geometry() {
        let lambda = 2.0;
        let array = AntennaArray::new(
            vec![FarFieldPattern::Isotropic, FarFieldPattern::Isotropic],
            vec![(0.0, 0.0), (lambda / 2.0, 0.0)],
            lambda,
        )
        .unwrap();
        assert_eq!(array.plane_wave_phase(0, 1.234), 0.0);
        assert!((array.plane_wave_phase(1, 0.0) + PI).abs() < 1e-12);
        // Broadside arrival: no path difference.
        assert!(array.plane_wave_phase(1, FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_phase_negates_when_reference_swaps() {
        let lambda = 0.75;
        let positions = vec![(0.2, -0.1), (0.5, 0.9)];
        let swapped = vec![positions[1], positions[0]];
        let elems = vec![FarFieldPattern::Isotropic, FarFieldPattern::Isotropic];
        let a = AntennaArray::new(elems.clone(), positions, lambda).unwrap();
        let b = AntennaArray::new(elems, swapped, lambda).unwrap();
        for i in 0..32 {
            let phi = i as f64 * TAU / 32.0;
            let d = a.plane_wave_phase(1, phi) + b.plane_wave_phase(1, phi);
            assert!(d.abs() < 1e-12, "antisymmetry violated by {d}");
        }
    }

    #[test]
    fn array_validation() {
        let iso = FarFieldPattern::Isotropic;
        assert!(AntennaArray::new(vec![], vec![], 1.0).is_err());
        assert!(AntennaArray::new(vec![iso.clone()], vec![(0.0, 0.0), (1.0, 0.0)], 1.0).is_err());
        assert!(AntennaArray::new(vec![iso.clone()], vec![(0.0, 0.0)], 0.0).is_err());
        assert!(AntennaArray::new(vec![iso], vec![(0.0, 0.0)], 1.0).is_ok());
    }

    #[test]
    fn normalization_is_azimuth_mean_square() {
        let p = FarFieldPattern::DipoleCosine { pointing: 0.0 };
        // Mean square of cos^2 over a period is 1/2.
        assert!((p.mean_square_gain(4096) - 0.5).abs() < 1e-9);
        let n = p.normalize_mean_square(720).unwrap();
        assert!((n.mean_square_gain(720) - 1.0).abs() < 1e-9);
    }
}
