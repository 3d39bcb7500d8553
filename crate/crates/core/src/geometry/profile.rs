//! Meridian profiles of surfaces of revolution.

use std::f64::consts::TAU;
use std::path::Path;

use crate::{Error, Result};

/// One input sample of an arclength-parameterized profile `s ↦ (r, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    pub s: f64,
    pub r: f64,
    pub z: f64,
    /// Unit tangent `(r', z')`, if known.
    pub tangent: Option<(f64, f64)>,
    /// Signed curvature `r' z'' - z' r''`, if known.
    pub curvature: Option<f64>,
}

impl ProfileSample {
    pub fn position(s: f64, r: f64, z: f64) -> Self {
        ProfileSample {
            s,
            r,
            z,
            tangent: None,
            curvature: None,
        }
    }
}

/// Interpolated profile data at one arclength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfilePoint {
    pub r: f64,
    pub z: f64,
    pub dr: f64,
    pub dz: f64,
    pub curvature: f64,
}

/// Sampled meridian curve with tangents and curvature at every knot.
///
/// Closed profiles are periodic in `s` with period [`Profile::length`]; the
/// knot at `s = length` is not stored. Positions between knots are cubic
/// Hermite interpolants, tangents and curvature are linear interpolants.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    s: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    dr: Vec<f64>,
    dz: Vec<f64>,
    curvature: Vec<f64>,
    closed: bool,
    length: f64,
}

impl Profile {
    /// Builds a profile from samples. A closed profile is recognized by a
    /// final sample repeating the first position; missing tangents and
    /// curvatures are filled in by finite differences.
    pub fn from_samples(mut samples: Vec<ProfileSample>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "profile needs at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples.windows(2).any(|w| !(w[1].s > w[0].s)) {
            return Err(Error::InvalidArgument(
                "profile arclength must be strictly increasing".into(),
            ));
        }
        let first = samples[0];
        let last = samples[samples.len() - 1];
        let scale = last.s - first.s;
        let closed = (last.r - first.r).hypot(last.z - first.z) <= 1e-9 * scale;
        let length = scale;
        if closed {
            samples.pop();
        }
        if let Some(bad) = samples.iter().find(|p| !(p.r > 0.0)) {
            return Err(Error::UnsupportedGeometry(format!(
                "profile touches or crosses the axis (r = {} at s = {})",
                bad.r, bad.s
            )));
        }
        let s0 = first.s;
        let s: Vec<f64> = samples.iter().map(|p| p.s - s0).collect();
        let r: Vec<f64> = samples.iter().map(|p| p.r).collect();
        let z: Vec<f64> = samples.iter().map(|p| p.z).collect();

        let n = s.len();
        let fd = FiniteDifferences {
            s: &s,
            closed,
            length,
        };
        let (dr_fd, drr) = fd.derivatives(&r);
        let (dz_fd, dzz) = fd.derivatives(&z);
        let mut dr = Vec::with_capacity(n);
        let mut dz = Vec::with_capacity(n);
        let mut curvature = Vec::with_capacity(n);
        for i in 0..n {
            let (tr, tz) = samples[i].tangent.unwrap_or((dr_fd[i], dz_fd[i]));
            let norm = tr.hypot(tz);
            if !(norm > 0.0) {
                return Err(Error::InvalidArgument(format!("zero tangent at s = {}", s[i])));
            }
            let (tr, tz) = (tr / norm, tz / norm);
            dr.push(tr);
            dz.push(tz);
            let k = samples[i].curvature.unwrap_or_else(|| {
                let speed_sq = dr_fd[i] * dr_fd[i] + dz_fd[i] * dz_fd[i];
                (dr_fd[i] * dzz[i] - dz_fd[i] * drr[i]) / speed_sq.powf(1.5)
            });
            curvature.push(k);
        }
        Ok(Profile {
            s,
            r,
            z,
            dr,
            dz,
            curvature,
            closed,
            length,
        })
    }

    /// Parses whitespace-separated sample text. Three columns are
    /// `s r z`; two columns are `r z` with arclength taken as the cumulative
    /// chord length. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Config {
                        line: lineno + 1,
                        message: format!("not a number: {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != 2 && row.len() != 3 {
                return Err(Error::Config {
                    line: lineno + 1,
                    message: format!("expected 2 or 3 columns, got {}", row.len()),
                });
            }
            if let Some(prev) = rows.first() {
                if prev.len() != row.len() {
                    return Err(Error::Config {
                        line: lineno + 1,
                        message: "inconsistent column count".into(),
                    });
                }
            }
            rows.push(row);
        }
        let samples = if rows.first().is_some_and(|r| r.len() == 3) {
            rows.iter()
                .map(|r| ProfileSample::position(r[0], r[1], r[2]))
                .collect()
        } else {
            let mut s = 0.0;
            let mut prev: Option<(f64, f64)> = None;
            rows.iter()
                .map(|row| {
                    if let Some((r0, z0)) = prev {
                        s += (row[0] - r0).hypot(row[1] - z0);
                    }
                    prev = Some((row[0], row[1]));
                    ProfileSample::position(s, row[0], row[1])
                })
                .collect()
        };
        Self::from_samples(samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Meridian circle of radius `minor` centred at distance `major` from
    /// the axis, traversed counter-clockwise.
    pub fn torus(major: f64, minor: f64, samples: usize) -> Result<Self> {
        if !(major > minor && minor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "torus needs major > minor > 0, got {major}, {minor}"
            )));
        }
        let n = samples.max(4);
        let length = TAU * minor;
        let pts = (0..=n)
            .map(|i| {
                let s = length * i as f64 / n as f64;
                let a = s / minor;
                ProfileSample {
                    s,
                    r: major + minor * a.cos(),
                    z: minor * a.sin(),
                    tangent: Some((-a.sin(), a.cos())),
                    curvature: Some(1.0 / minor),
                }
            })
            .collect::<Vec<_>>();
        Self::from_samples(pts)
    }

    /// Straight meridian `r = radius`, `z ∈ [0, length]`.
    pub fn cylinder(radius: f64, length: f64, samples: usize) -> Result<Self> {
        Self::line(samples, length, |s| (radius, s), (0.0, 1.0))
    }

    /// Flat ring `z = 0`, `r ∈ [inner, outer]`.
    pub fn annulus(inner: f64, outer: f64, samples: usize) -> Result<Self> {
        Self::line(samples, outer - inner, |s| (inner + s, 0.0), (1.0, 0.0))
    }

    fn line(
        samples: usize,
        length: f64,
        at: impl Fn(f64) -> (f64, f64),
        tangent: (f64, f64),
    ) -> Result<Self> {
        let n = samples.max(4);
        let pts = (0..=n)
            .map(|i| {
                let s = length * i as f64 / n as f64;
                let (r, z) = at(s);
                ProfileSample {
                    s,
                    r,
                    z,
                    tangent: Some(tangent),
                    curvature: Some(0.0),
                }
            })
            .collect();
        Self::from_samples(pts)
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Total arclength (the period for closed profiles).
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Arclength of every stored knot.
    pub fn knots(&self) -> impl Iterator<Item = f64> + '_ {
        self.s.iter().copied()
    }

    pub fn eval(&self, s: f64) -> ProfilePoint {
        let n = self.s.len();
        let s = if self.closed {
            s.rem_euclid(self.length)
        } else {
            s.clamp(0.0, self.length)
        };
        // Interval [s_i, s_{i+1}], wrapping to the first knot for closed profiles.
        let i = match self.s.binary_search_by(|k| k.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let (j, s_hi) = if i + 1 < n {
            (i + 1, self.s[i + 1])
        } else if self.closed {
            (0, self.length)
        } else {
            let p = i.saturating_sub(1);
            return self.point_between(p, i, self.s[p], self.s[i], s);
        };
        self.point_between(i, j, self.s[i], s_hi, s)
    }

    fn point_between(&self, i: usize, j: usize, s_lo: f64, s_hi: f64, s: f64) -> ProfilePoint {
        let h = s_hi - s_lo;
        let u = (s - s_lo) / h;
        let hermite = |p0: f64, m0: f64, p1: f64, m1: f64| {
            let u2 = u * u;
            let u3 = u2 * u;
            (2.0 * u3 - 3.0 * u2 + 1.0) * p0
                + (u3 - 2.0 * u2 + u) * h * m0
                + (-2.0 * u3 + 3.0 * u2) * p1
                + (u3 - u2) * h * m1
        };
        let lerp = |a: f64, b: f64| a + u * (b - a);
        let (dr, dz) = (lerp(self.dr[i], self.dr[j]), lerp(self.dz[i], self.dz[j]));
        let norm = dr.hypot(dz);
        ProfilePoint {
            r: hermite(self.r[i], self.dr[i], self.r[j], self.dr[j]),
            z: hermite(self.z[i], self.dz[i], self.z[j], self.dz[j]),
            dr: dr / norm,
            dz: dz / norm,
            curvature: lerp(self.curvature[i], self.curvature[j]),
        }
    }
}

/// Second-order three-point derivatives on a possibly non-uniform grid.
struct FiniteDifferences<'a> {
    s: &'a [f64],
    closed: bool,
    length: f64,
}

impl FiniteDifferences<'_> {
    fn derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = f.len();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            // Stencil offsets (relative arclength) and values.
            let (xs, fs) = if self.closed {
                let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
                let hm = if i == 0 { self.s[0] + self.length - self.s[n - 1] } else { self.s[i] - self.s[im] };
                let hp = if i + 1 == n { self.length - self.s[i] } else { self.s[ip] - self.s[i] };
                ([-hm, 0.0, hp], [f[im], f[i], f[ip]])
            } else {
                let c = i.clamp(1, n - 2);
                let xs = [
                    self.s[c - 1] - self.s[i],
                    self.s[c] - self.s[i],
                    self.s[c + 1] - self.s[i],
                ];
                (xs, [f[c - 1], f[c], f[c + 1]])
            };
            let (w1, w2) = lagrange_derivative_weights(xs);
            d1[i] = w1.iter().zip(&fs).map(|(w, v)| w * v).sum();
            d2[i] = w2.iter().zip(&fs).map(|(w, v)| w * v).sum();
        }
        (d1, d2)
    }
}

/// Weights of the first and second derivative at 0 of the quadratic through
/// the three nodes `xs`.
fn lagrange_derivative_weights(xs: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut w1 = [0.0; 3];
    let mut w2 = [0.0; 3];
    for k in 0..3 {
        let (a, b) = ((k + 1) % 3, (k + 2) % 3);
        let denom = (xs[k] - xs[a]) * (xs[k] - xs[b]);
        // L_k(x) = (x - xa)(x - xb)/denom
        w1[k] = (-xs[a] - xs[b]) / denom;
        w2[k] = 2.0 / denom;
    }
    (w1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_fallback_recovers_torus_curvature() {
        let (big, small) = (3.0, 1.0);
        let n = 400;
        let text: String = (0..=n)
            .map(|i| {
                let s = TAU * small * i as f64 / n as f64;
                let a = s / small;
                format!("{s} {} {}\n", big + small * a.cos(), small * a.sin())
            })
            .collect();
        let p = Profile::parse(&format!("# torus meridian\n{text}")).unwrap();
        assert!(p.is_closed());
        assert!((p.length() - TAU).abs() < 1e-12);
        for s in [0.0, 0.77, 2.0, 5.5] {
            let q = p.eval(s);
            assert!((q.curvature - 1.0).abs() < 1e-3, "{}", q.curvature);
            assert!((q.r - (big + (s / small).cos())).abs() < 1e-6);
            assert!((q.dz - (s / small).cos()).abs() < 1e-3);
        }
    }

    #[test]
    fn two_column_files_use_chord_length() {
        let p = Profile::parse("1 0\n1 0.5\n1 1.0\n1 1.5\n1 2.0\n").unwrap();
        assert!(!p.is_closed());
        assert!((p.length() - 2.0).abs() < 1e-15);
        let q = p.eval(1.3);
        assert!((q.z - 1.3).abs() < 1e-12);
        assert_eq!(q.curvature, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Profile::parse("1 0\n1 1\n").is_err());
        assert!(Profile::parse("0 1 0\n1 1 1\n2 1 2\nx 1 3\n").is_err());
        assert!(Profile::parse("0 1 0\n1 1 1\n2 1 2\n3 1\n").is_err());
        assert!(matches!(
            Profile::parse("0 1 0\n1 0 1\n2 1 2\n3 1 3\n"),
            Err(Error::UnsupportedGeometry(_))
        ));
    }
}
