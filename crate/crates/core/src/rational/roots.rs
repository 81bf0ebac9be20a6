//! Root location by the argument principle, with box subdivision and
//! Newton polishing.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::function::Root;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

/// Axis-aligned rectangle `[re.0, re.1] × [im.0, im.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SearchBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Self> {
        let ok = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
        if !ok(re) || !ok(im) {
            return Err(Error::invalid("search_box", format!("degenerate rectangle {re:?} x {im:?}")));
        }
        Ok(Self { re, im })
    }

    fn width(&self) -> f64 {
        self.re.1 - self.re.0
    }

    fn height(&self) -> f64 {
        self.im.1 - self.im.0
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn scale(&self) -> f64 {
        1f64.max(self.re.0.abs()).max(self.re.1.abs()).max(self.im.0.abs()).max(self.im.1.abs())
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    fn split(&self, fraction: f64) -> (Self, Self) {
        if self.width() >= self.height() {
            let cut = self.re.0 + fraction * self.width();
            (Self { re: (self.re.0, cut), ..*self }, Self { re: (cut, self.re.1), ..*self })
        } else {
            let cut = self.im.0 + fraction * self.height();
            (Self { im: (self.im.0, cut), ..*self }, Self { im: (cut, self.im.1), ..*self })
        }
    }
}

const INITIAL_SEGMENTS: usize = 32;
const MAX_ARG_STEP: f64 = PI / 4.0;
const MAX_BISECTIONS: usize = 48;

/// Net number of zeros minus poles of `f` inside the box.
pub fn argument_count<F>(f: &F, search_box: &SearchBox) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let corners = search_box.corners();
    let mut total = 0.0;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        total += edge_phase(f, a, b)?;
    }
    let turns = total / (2.0 * PI);
    let count = turns.round();
    if (turns - count).abs() > 0.1 {
        return Err(Error::ContourThroughRoot { near: search_box.center() });
    }
    Ok(count as i64)
}

fn checked<F>(f: &F, z: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let v = f(z)?;
    if !(v.norm() > 0.0) || !v.norm().is_finite() {
        return Err(Error::ContourThroughRoot { near: z });
    }
    Ok(v)
}

fn edge_phase<F>(f: &F, a: Complex64, b: Complex64) -> Result<f64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let point = |t: f64| a + (b - a) * t;
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_v = checked(f, a)?;
    for k in 1..=INITIAL_SEGMENTS {
        let t = k as f64 / INITIAL_SEGMENTS as f64;
        let v = checked(f, point(t))?;
        // Bisect until each step turns by less than the threshold.
        let mut stack = vec![(prev_t, prev_v, t, v, 0usize)];
        while let Some((t0, v0, t1, v1, depth)) = stack.pop() {
            let ratio = v1 / v0;
            let fine = ratio.arg().abs() <= MAX_ARG_STEP && ratio.norm() < 4.0 && ratio.norm() > 0.25;
            if fine {
                total += ratio.arg();
                continue;
            }
            if depth >= MAX_BISECTIONS {
                return Err(Error::ContourThroughRoot { near: point(0.5 * (t0 + t1)) });
            }
            let tm = 0.5 * (t0 + t1);
            let vm = checked(f, point(tm))?;
            // Later half pushed first so the earlier half is summed first.
            stack.push((tm, vm, t1, v1, depth + 1));
            stack.push((t0, v0, tm, vm, depth + 1));
        }
        prev_t = t;
        prev_v = v;
    }
    Ok(total)
}

/// Modified Newton iteration for a root of multiplicity `m`, kept inside
/// `bounds`; `None` if it leaves the box or fails to settle.
fn newton<F>(f: &F, start: Complex64, m: u32, bounds: &SearchBox) -> Result<Option<Complex64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let slack = 1e-9 * bounds.scale();
    let mut z = start;
    for _ in 0..80 {
        let fz = f(z)?;
        if fz.norm() == 0.0 {
            return Ok(Some(z));
        }
        let d = 1e-6 * z.norm().max(bounds.width().min(bounds.height()).min(1.0));
        let deriv = (f(z + d)? - f(z - d)?) / (2.0 * d);
        if deriv.norm() == 0.0 || !deriv.norm().is_finite() {
            return Ok(None);
        }
        let step = fz / deriv * m as f64;
        z -= step;
        if !bounds.contains(z, slack) {
            return Ok(None);
        }
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

const SPLIT_FRACTIONS: [f64; 6] = [0.5317, 0.4389, 0.6071, 0.3707, 0.5593, 0.4661];

fn subdivide<F>(f: &F, search_box: SearchBox, count: i64, out: &mut Vec<Root>) -> Result<()>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if count <= 0 {
        if count < 0 {
            return Err(Error::NonAnalytic { point: search_box.center() });
        }
        return Ok(());
    }
    let size = search_box.width().max(search_box.height());
    if count == 1 {
        if let Some(z) = newton(f, search_box.center(), 1, &search_box)? {
            out.push(Root::simple(z));
            return Ok(());
        }
    }
    if size < 1e-8 * search_box.scale() {
        // A cluster too tight to separate: one root of multiplicity `count`.
        let m = count as u32;
        let z = newton(f, search_box.center(), m, &search_box)?.unwrap_or(search_box.center());
        out.push(Root::new(z, m));
        return Ok(());
    }
    for fraction in SPLIT_FRACTIONS {
        let (a, b) = search_box.split(fraction);
        let counts = argument_count(f, &a).and_then(|ca| Ok((ca, argument_count(f, &b)?)));
        match counts {
            Ok((ca, cb)) if ca + cb == count && ca >= 0 && cb >= 0 => {
                subdivide(f, a, ca, out)?;
                return subdivide(f, b, cb, out);
            }
            Ok(_) | Err(Error::ContourThroughRoot { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ContourThroughRoot { near: search_box.center() })
}

/// All roots of `f` inside `search_box`, which must lie in the chosen
/// closed half-plane. `f` must be analytic and pole-free on the box.
pub fn find_halfplane_roots<F>(f: F, which: HalfPlane, search_box: SearchBox) -> Result<Vec<Root>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let inside = match which {
        HalfPlane::Upper => search_box.im.0 >= 0.0,
        HalfPlane::Lower => search_box.im.1 <= 0.0,
    };
    if !inside {
        return Err(Error::invalid("search_box", format!("box does not lie in the {which:?} half-plane")));
    }
    let count = argument_count(&f, &search_box)?;
    let mut roots = Vec::new();
    subdivide(&f, search_box, count, &mut roots)?;
    roots.sort_by(|a, b| {
        a.location.im.abs().total_cmp(&b.location.im.abs()).then(a.location.re.total_cmp(&b.location.re))
    });
    Ok(roots)
}

/// Roots in a half-plane strip `0 < ±Im z < height`, widening the box
/// (and, for an unbounded strip, its height) until the root count has not
/// changed over two consecutive expansions.
pub fn strip_roots<F>(f: F, which: HalfPlane, height: f64, initial_width: f64) -> Result<Vec<Root>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut half = initial_width.max(1.0);
    let mut depth = if height.is_finite() { height } else { half };
    let make = |half: f64, depth: f64| match which {
        HalfPlane::Upper => SearchBox::new((-half, half), (0.0, depth)),
        HalfPlane::Lower => SearchBox::new((-half, half), (-depth, 0.0)),
    };
    let mut history: Vec<i64> = Vec::new();
    for _ in 0..40 {
        let b = make(half, depth)?;
        history.push(argument_count(&f, &b)?);
        let n = history.len();
        if n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3] {
            return find_halfplane_roots(&f, which, b);
        }
        half *= 2.0;
        if !height.is_finite() {
            depth *= 2.0;
        }
    }
    Err(Error::invalid("search_box", "root count did not stabilise while widening"))
}
