use std::f64::consts::FRAC_PI_2;

use maad_core::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        start: Point,
        heading: f64,
        length: f64,
    },
    /// `sweep` is signed: positive turns left.
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { length, .. } => length,
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn point(&self, u: f64) -> Point {
        match *self {
            Segment::Line { start, heading, .. } => [start[0] + u * heading.cos(), start[1] + u * heading.sin()],
            Segment::Arc { center, radius, start_angle, sweep } => {
                let phi = start_angle + sweep.signum() * u / radius;
                [center[0] + radius * phi.cos(), center[1] + radius * phi.sin()]
            }
        }
    }

    fn heading(&self, u: f64) -> f64 {
        match *self {
            Segment::Line { heading, .. } => heading,
            Segment::Arc { radius, start_angle, sweep, .. } => start_angle + sweep.signum() * (u / radius + FRAC_PI_2),
        }
    }

    /// Arc-length parameter of the closest point, clamped to the segment.
    fn project(&self, p: Point) -> f64 {
        match *self {
            Segment::Line { start, heading, length } => {
                ((p[0] - start[0]) * heading.cos() + (p[1] - start[1]) * heading.sin()).clamp(0.0, length)
            }
            Segment::Arc { center, radius, start_angle, sweep } => {
                let phi = (p[1] - center[1]).atan2(p[0] - center[0]);
                let mut rel = sweep.signum() * (phi - start_angle);
                rel = rel.rem_euclid(2.0 * std::f64::consts::PI);
                // Angles past the end snap to whichever endpoint is nearer.
                if rel > sweep.abs() {
                    let over = rel - sweep.abs();
                    let under = 2.0 * std::f64::consts::PI - rel;
                    rel = if over < under { sweep.abs() } else { 0.0 };
                }
                rel * radius
            }
        }
    }

    fn end_pose(&self) -> (Point, f64) {
        let l = self.length();
        (self.point(l), self.heading(l))
    }
}

/// Arc-length parametrised chain of lines and circular arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    segments: Vec<Segment>,
    offsets: Vec<f64>,
    length: f64,
}

impl Path {
    pub fn new(segments: Vec<Segment>) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut length = 0.0;
        for s in &segments {
            offsets.push(length);
            length += s.length();
        }
        Path { segments, offsets, length }
    }

    pub fn line(start: Point, heading: f64, length: f64) -> Self {
        Path::new(vec![Segment::Line { start, heading, length }])
    }

    /// Starts a builder at `start` heading `heading`.
    pub fn builder(start: Point, heading: f64) -> PathBuilder {
        PathBuilder { pos: start, heading, segments: Vec::new() }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let i = match self.offsets.binary_search_by(|o| o.partial_cmp(&s).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        let i = i.min(self.segments.len() - 1);
        (i, s - self.offsets[i])
    }

    /// Point at arc length `s`; beyond either end the path is extended along its end tangent.
    pub fn point(&self, s: f64) -> Point {
        if s < 0.0 {
            let h = self.segments[0].heading(0.0);
            let p = self.segments[0].point(0.0);
            return [p[0] + s * h.cos(), p[1] + s * h.sin()];
        }
        if s > self.length {
            let (p, h) = self.segments.last().unwrap().end_pose();
            let e = s - self.length;
            return [p[0] + e * h.cos(), p[1] + e * h.sin()];
        }
        let (i, u) = self.locate(s);
        self.segments[i].point(u)
    }

    pub fn heading(&self, s: f64) -> f64 {
        let (i, u) = self.locate(s.clamp(0.0, self.length));
        self.segments[i].heading(u.min(self.segments[i].length()))
    }

    pub fn left_normal(&self, s: f64) -> Point {
        let h = self.heading(s);
        [-h.sin(), h.cos()]
    }

    /// Point offset by `d` metres to the left of the path.
    pub fn offset_point(&self, s: f64, d: f64) -> Point {
        let p = self.point(s);
        let n = self.left_normal(s);
        [p[0] + d * n[0], p[1] + d * n[1]]
    }

    /// Arc length and signed lateral offset of the closest path point.
    pub fn project(&self, p: Point) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for (seg, off) in self.segments.iter().zip(&self.offsets) {
            let u = seg.project(p);
            let q = seg.point(u);
            let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
            if d2 < best.0 {
                let h = seg.heading(u);
                let lateral = h.cos() * (p[1] - q[1]) - h.sin() * (p[0] - q[0]);
                best = (d2, off + u, lateral);
            }
        }
        (best.1, best.2)
    }

    /// Polyline through the path with chord spacing at most `step` on arcs.
    pub fn sample(&self, from: f64, to: f64, step: f64) -> Vec<Point> {
        let mut out = vec![self.point(from)];
        for (seg, &off) in self.segments.iter().zip(&self.offsets) {
            let (a, b) = (off.max(from), (off + seg.length()).min(to));
            if b <= a {
                continue;
            }
            let n = match seg {
                Segment::Line { .. } => 1,
                Segment::Arc { .. } => ((b - a) / step).ceil().max(1.0) as usize,
            };
            for k in 1..=n {
                out.push(seg.point(a - off + (b - a) * k as f64 / n as f64));
            }
        }
        out.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        out
    }
}

pub struct PathBuilder {
    pos: Point,
    heading: f64,
    segments: Vec<Segment>,
}

impl PathBuilder {
    pub fn straight(mut self, length: f64) -> Self {
        if length > 0.0 {
            let seg = Segment::Line { start: self.pos, heading: self.heading, length };
            self.pos = seg.end_pose().0;
            self.segments.push(seg);
        }
        self
    }

    /// Circular arc of `radius`, turning by `sweep` radians (positive = left).
    pub fn arc(mut self, radius: f64, sweep: f64) -> Self {
        let side = sweep.signum();
        let center = [self.pos[0] - side * radius * self.heading.sin(), self.pos[1] + side * radius * self.heading.cos()];
        let start_angle = (self.pos[1] - center[1]).atan2(self.pos[0] - center[0]);
        let seg = Segment::Arc { center, radius, start_angle, sweep };
        let (p, h) = seg.end_pose();
        self.pos = p;
        self.heading = h;
        self.segments.push(seg);
        self
    }

    pub fn build(self) -> Path {
        Path::new(self.segments)
    }
}

/// Quintic smoothstep on [0, 1] with zero first and second derivative at both ends.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: f64,
    pub translation: Point,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { rotation: 0.0, translation: [0.0, 0.0] }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.rotation.sin_cos();
        [c * p[0] - s * p[1] + self.translation[0], s * p[0] + c * p[1] + self.translation[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a[0] - b[0]).abs() < tol && (a[1] - b[1]).abs() < tol
    }

    #[test]
    fn quarter_arc_lands_on_expected_point() {
        let left = Path::builder([-8.0, -1.75], 0.0).arc(9.75, FRAC_PI_2).build();
        assert!(close(left.point(left.length()), [1.75, 8.0], 1e-12));
        assert!((left.heading(left.length()) - FRAC_PI_2).abs() < 1e-12);
        let right = Path::builder([-8.0, -1.75], 0.0).arc(6.25, -FRAC_PI_2).build();
        assert!(close(right.point(right.length()), [-1.75, -8.0], 1e-12));
        assert!((right.heading(right.length()) + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn projection_inverts_offset_point() {
        let path = Path::builder([0.0, 0.0], 0.3).straight(10.0).arc(20.0, 1.0).straight(5.0).arc(8.0, -0.7).build();
        for k in 0..50 {
            let s = path.length() * k as f64 / 49.0;
            for d in [-2.0, 0.0, 1.5] {
                let (s2, d2) = path.project(path.offset_point(s, d));
                assert!((s2 - s).abs() < 1e-9 && (d2 - d).abs() < 1e-9, "s={s} d={d} got {s2} {d2}");
            }
        }
    }

    #[test]
    fn points_are_continuous_across_segments() {
        let path = Path::builder([3.0, 4.0], -PI / 3.0).straight(7.0).arc(5.0, -2.0).arc(12.0, 1.0).build();
        let mut prev = path.point(0.0);
        let mut s = 0.01;
        while s < path.length() {
            let p = path.point(s);
            assert!(((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt() <= 0.01 + 1e-9);
            prev = p;
            s += 0.01;
        }
    }

    #[test]
    fn sampling_keeps_endpoints() {
        let path = Path::builder([0.0, 0.0], 0.0).straight(10.0).arc(10.0, FRAC_PI_2).build();
        let pts = path.sample(5.0, path.length(), 2.0);
        assert!(close(pts[0], [5.0, 0.0], 1e-12));
        assert!(close(*pts.last().unwrap(), [20.0, 10.0], 1e-9));
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
    }
}
