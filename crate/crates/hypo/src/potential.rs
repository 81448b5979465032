//! Periodic potentials on a circle, their critical points and sublevel-set barcodes.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub circumference: f64,
    #[serde(default)]
    pub cos_coeffs: Vec<f64>,
    #[serde(default)]
    pub sin_coeffs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub q: f64,
    pub value: f64,
    pub kind: CriticalKind,
}

impl Potential {
    pub fn new(circumference: f64, cos_coeffs: Vec<f64>, sin_coeffs: Vec<f64>) -> Self {
        Potential { circumference, cos_coeffs, sin_coeffs }
    }

    pub fn zero(circumference: f64) -> Self {
        Self::new(circumference, vec![], vec![])
    }

    /// `cos q` on the circle of length 2π.
    pub fn single_well() -> Self {
        Self::new(2.0 * PI, vec![0.0, 1.0], vec![])
    }

    /// `cos 2q + 0.2 cos q`.
    pub fn double_well() -> Self {
        Self::new(2.0 * PI, vec![0.0, 0.2, 1.0], vec![])
    }

    /// `0.5 sin 3q`.
    pub fn triple_well() -> Self {
        Self::new(2.0 * PI, vec![], vec![0.0, 0.0, 0.0, 0.5])
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.circumference
    }

    fn a(&self, k: usize) -> f64 {
        self.cos_coeffs.get(k).copied().unwrap_or(0.0)
    }

    fn b(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.sin_coeffs.get(k).copied().unwrap_or(0.0)
        }
    }

    /// Highest Fourier mode with a nonzero coefficient (constant terms excluded).
    pub fn degree(&self) -> usize {
        let n = self.cos_coeffs.len().max(self.sin_coeffs.len());
        (1..n).rev().find(|&k| self.a(k) != 0.0 || self.b(k) != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, q: f64, order: u8) -> f64 {
        assert!(order <= 2, "order must be 0, 1 or 2");
        let w = self.omega();
        let n = self.cos_coeffs.len().max(self.sin_coeffs.len());
        let mut s = 0.0;
        for k in 0..n {
            let (a, b) = (self.a(k), self.b(k));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let wk = w * k as f64;
            let (sn, cs) = (wk * q).sin_cos();
            s += match order {
                0 => a * cs + b * sn,
                1 => wk * (-a * sn + b * cs),
                _ => -wk * wk * (a * cs + b * sn),
            };
        }
        s
    }

    /// Coefficients of `V^{(order)}` in `e^{iωkq}`, indexed `k + degree` for `|k| <= degree`.
    pub fn exp_coeffs(&self, order: u8) -> Vec<C64> {
        let d = self.degree();
        let w = self.omega();
        let mut c = vec![C64::new(0.0, 0.0); 2 * d + 1];
        c[d] = C64::from(self.a(0));
        for k in 1..=d {
            let (a, b) = (self.a(k), self.b(k));
            c[d + k] = C64::new(a / 2.0, -b / 2.0);
            c[d - k] = C64::new(a / 2.0, b / 2.0);
        }
        for (j, v) in c.iter_mut().enumerate() {
            let k = j as f64 - d as f64;
            *v *= C64::new(0.0, w * k).powu(order as u32);
        }
        if order > 0 {
            c[d] = C64::new(0.0, 0.0);
        }
        c
    }

    pub fn scaled(&self, s: f64) -> Self {
        Potential {
            circumference: self.circumference,
            cos_coeffs: self.cos_coeffs.iter().map(|v| v * s).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(|v| v * s).collect(),
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// `V^h(q) = V(hq)/h` on the circle of length `ℓ/h`.
    pub fn dilated(&self, h: f64) -> Self {
        let mut v = self.scaled(1.0 / h);
        v.circumference = self.circumference / h;
        v
    }

    pub fn sup_norm_bound(&self, order: u8) -> f64 {
        self.exp_coeffs(order).iter().map(|c| c.norm()).sum()
    }

    /// Critical points from sign changes of `V'` on a uniform grid, refined by bisection.
    pub fn critical_points(&self, grid_n: usize) -> Result<Vec<CriticalPoint>> {
        let n = grid_n.max(256);
        let l = self.circumference;
        let dq = l / n as f64;
        let vp: Vec<f64> = (0..n).map(|i| self.eval(i as f64 * dq, 1)).collect();
        let scale1 = self.sup_norm_bound(1).max(f64::MIN_POSITIVE);
        let scale2 = self.sup_norm_bound(2).max(f64::MIN_POSITIVE);
        let tol2 = 1e-8 * scale2;
        if vp.iter().all(|v| v.abs() <= 1e-14 * scale1.max(1.0)) {
            return Err(Error::NonMorse { q: 0.0, vpp: 0.0 });
        }
        let mut out = vec![];
        for i in 0..n {
            let j = (i + 1) % n;
            let (a, b) = (vp[i], vp[j]);
            let q0 = i as f64 * dq;
            if a == 0.0 {
                out.push(q0);
                continue;
            }
            if a * b < 0.0 {
                out.push(self.bisect(q0, q0 + dq, a));
            } else {
                // tangency of V' to zero between samples would hide a degenerate point
                let k = (i + n - 1) % n;
                if vp[i].abs() < vp[k].abs() && vp[i].abs() < vp[j].abs() && vp[i].abs() < 1e-6 * scale1 {
                    return Err(Error::NonMorse { q: q0, vpp: self.eval(q0, 2).abs() });
                }
            }
        }
        let mut cps = vec![];
        for q in out {
            let q = q.rem_euclid(l);
            let vpp = self.eval(q, 2);
            if vpp.abs() < tol2 {
                return Err(Error::NonMorse { q, vpp: vpp.abs() });
            }
            let kind = if vpp > 0.0 { CriticalKind::Min } else { CriticalKind::Max };
            cps.push(CriticalPoint { q, value: self.eval(q, 0), kind });
        }
        cps.sort_by(|a, b| a.q.partial_cmp(&b.q).unwrap());
        let alternating = cps.len() >= 2
            && cps.len() % 2 == 0
            && (0..cps.len()).all(|i| cps[i].kind != cps[(i + 1) % cps.len()].kind);
        if !alternating {
            let q = cps.first().map(|c| c.q).unwrap_or(0.0);
            return Err(Error::NonMorse { q, vpp: 0.0 });
        }
        Ok(cps)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
        let mut flo = flo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = self.eval(mid, 1);
            if fm.abs() < 1e-13 || hi - lo < 1e-15 * self.circumference {
                return mid;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn barcode(&self, grid_n: usize) -> Result<Barcode> {
        let cps = self.critical_points(grid_n)?;
        Ok(Barcode::from_critical_points(&cps))
    }

    /// Samples `V` on a uniform grid.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let dq = self.circumference / n as f64;
        (0..n).map(|i| self.eval(i as f64 * dq, 0)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    #[serde(with = "death_format")]
    pub death: f64,
    pub degree: u8,
}

impl Bar {
    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

mod death_format {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("bad death value {s}"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Barcode {
    pub bars: Vec<Bar>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Elder-rule sweep over items added in increasing filtration order on a cycle graph.
/// `order` lists node indices by increasing value; neighbours are `i±1 mod n`.
fn cycle_persistence(values: &[f64], order: &[usize]) -> Barcode {
    let n = values.len();
    let mut uf = UnionFind::new(n);
    let mut added = vec![false; n];
    // birth rank of each root: position in `order` of the node that created it
    let mut rank = vec![usize::MAX; n];
    let mut pos = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        pos[i] = r;
    }
    let mut bars = vec![];
    let mut cycle_birth = None;
    for &i in order {
        added[i] = true;
        rank[i] = pos[i];
        let nb: Vec<usize> = if n == 2 { vec![1 - i] } else { vec![(i + n - 1) % n, (i + 1) % n] };
        let roots: Vec<usize> = nb.iter().filter(|&&j| added[j]).map(|&j| uf.find(j)).collect();
        match roots.as_slice() {
            [] => {}
            [r] => uf.parent[i] = *r,
            [r1, r2] if r1 == r2 => {
                uf.parent[i] = *r1;
                cycle_birth = Some(values[i]);
            }
            [r1, r2] => {
                let (old, young) = if rank[*r1] < rank[*r2] { (*r1, *r2) } else { (*r2, *r1) };
                let birth = values[order[rank[young]]];
                bars.push(Bar { birth, death: values[i], degree: 0 });
                uf.parent[young] = old;
                uf.parent[i] = old;
            }
            _ => unreachable!(),
        }
    }
    let gmin = values[order[0]];
    bars.push(Bar { birth: gmin, death: f64::INFINITY, degree: 0 });
    let top = cycle_birth.unwrap_or(values[*order.last().unwrap()]);
    bars.push(Bar { birth: top, death: f64::INFINITY, degree: 1 });
    let mut bc = Barcode { bars };
    bc.normalize();
    bc
}

fn by_value_then_angle(values: &[f64], angles: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| match values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal) {
        Ordering::Equal => angles[a].partial_cmp(&angles[b]).unwrap_or(Ordering::Equal),
        o => o,
    });
    idx
}

impl Barcode {
    /// Sweep over the alternating critical points of a Morse function on the circle.
    pub fn from_critical_points(cps: &[CriticalPoint]) -> Self {
        let values: Vec<f64> = cps.iter().map(|c| c.value).collect();
        let angles: Vec<f64> = cps.iter().map(|c| c.q).collect();
        let order = by_value_then_angle(&values, &angles);
        cycle_persistence(&values, &order)
    }

    /// Brute-force oracle: persistence of the sampled sublevel filtration on a fine grid.
    pub fn from_samples(samples: &[f64]) -> Self {
        let angles: Vec<f64> = (0..samples.len()).map(|i| i as f64).collect();
        let order = by_value_then_angle(samples, &angles);
        let mut bc = cycle_persistence(samples, &order);
        bc.bars.retain(|b| !(b.is_finite() && b.length() == 0.0));
        bc
    }

    fn normalize(&mut self) {
        self.bars.sort_by(|a, b| {
            (a.degree, a.birth, a.death).partial_cmp(&(b.degree, b.birth, b.death)).unwrap_or(Ordering::Equal)
        });
    }

    pub fn finite(&self, degree: u8) -> Vec<Bar> {
        self.bars.iter().filter(|b| b.degree == degree && b.is_finite()).copied().collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.finite(0).iter().map(|b| b.length()).collect()
    }

    /// Number of degree-`d` bars alive at level `t`, i.e. `birth <= t < death`.
    pub fn alive(&self, degree: u8, t: f64) -> usize {
        self.bars.iter().filter(|b| b.degree == degree && b.birth <= t && t < b.death).count()
    }

    /// Same pairing and bar endpoints within `tol`.
    pub fn matches(&self, other: &Barcode, tol: f64) -> bool {
        if self.bars.len() != other.bars.len() {
            return false;
        }
        self.bars.iter().zip(&other.bars).all(|(a, b)| {
            a.degree == b.degree
                && (a.birth - b.birth).abs() <= tol
                && (a.death == b.death || (a.death - b.death).abs() <= tol)
        })
    }
}

/// Counts connected components of `{V <= t}` on a sampled circle.
pub fn sublevel_components(samples: &[f64], t: f64) -> usize {
    let n = samples.len();
    let inside: Vec<bool> = samples.iter().map(|&v| v <= t).collect();
    if inside.iter().all(|&b| b) {
        return 1;
    }
    (0..n).filter(|&i| inside[i] && !inside[(i + n - 1) % n]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let v = Potential::single_well();
        assert!((v.eval(0.0, 0) - 1.0).abs() < 1e-15);
        assert!((v.eval(PI / 2.0, 1) + 1.0).abs() < 1e-15);
        let w = Potential::double_well();
        assert!((w.eval(0.0, 2) + 4.2).abs() < 1e-14);
    }

    #[test]
    fn periodic() {
        let w = Potential::double_well();
        for q in [0.1, 1.3, 4.0] {
            assert!((w.eval(q, 0) - w.eval(q + w.circumference, 0)).abs() < 1e-13);
        }
    }

    #[test]
    fn exp_coeffs_resum() {
        let w = Potential::new(3.0, vec![0.3, 0.2, -0.7], vec![0.0, 0.5, 0.1]);
        let d = w.degree();
        for order in 0..3u8 {
            let c = w.exp_coeffs(order);
            for q in [0.0, 0.4, 2.2] {
                let s: C64 = c
                    .iter()
                    .enumerate()
                    .map(|(j, ck)| ck * C64::new(0.0, w.omega() * (j as f64 - d as f64) * q).exp())
                    .sum();
                assert!((s.re - w.eval(q, order)).abs() < 1e-13 && s.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn critical_points_single_well() {
        let cps = Potential::single_well().critical_points(256).unwrap();
        assert_eq!(cps.len(), 2);
        assert!(cps[0].q.abs() < 1e-12 || (cps[0].q - 2.0 * PI).abs() < 1e-12);
        assert_eq!(cps[0].kind, CriticalKind::Max);
        assert!((cps[1].q - PI).abs() < 1e-12 && (cps[1].value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn double_well_values() {
        let cps = Potential::double_well().critical_points(1024).unwrap();
        let maxima: Vec<f64> = cps.iter().filter(|c| c.kind == CriticalKind::Max).map(|c| c.value).collect();
        assert_eq!(maxima.len(), 2);
        assert!(maxima.iter().any(|v| (v - 1.2).abs() < 1e-12));
        assert!(maxima.iter().any(|v| (v - 0.8).abs() < 1e-12));
        let bc = Potential::double_well().barcode(1024).unwrap();
        let f = bc.finite(0);
        assert_eq!(f.len(), 1);
        assert!((f[0].birth + 1.005).abs() < 1e-12 && (f[0].death - 0.8).abs() < 1e-12);
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(Potential::zero(1.0).critical_points(256), Err(Error::NonMorse { .. })));
    }

    #[test]
    fn barcode_json() {
        let bc = Potential::single_well().barcode(256).unwrap();
        let s = serde_json::to_string(&bc).unwrap();
        assert!(s.contains("\"inf\""));
        let back: Barcode = serde_json::from_str(&s).unwrap();
        assert_eq!(back, bc);
    }
}
