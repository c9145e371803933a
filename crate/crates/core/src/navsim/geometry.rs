//! Planar primitives for collision handling.

use nalgebra::Point2;

/// 2-D line segment in environment units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point2<f64>,
    pub b: Point2<f64>,
}

impl Segment {
    pub fn new(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Segment {
            a: Point2::new(ax, ay),
            b: Point2::new(bx, by),
        }
    }
}

/// Axis-aligned rectangle, used for solid obstacles and the world bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    /// Closed containment test (boundary points count as inside).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    /// The four edges, counter-clockwise from the bottom edge.
    pub fn edges(&self) -> [Segment; 4] {
        [
            Segment::new(self.min_x, self.min_y, self.max_x, self.min_y),
            Segment::new(self.max_x, self.min_y, self.max_x, self.max_y),
            Segment::new(self.max_x, self.max_y, self.min_x, self.max_y),
            Segment::new(self.min_x, self.max_y, self.min_x, self.min_y),
        ]
    }
}

fn orient(a: Point2<f64>, b: Point2<f64>, c: Point2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point2<f64>, b: Point2<f64>, p: Point2<f64>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether two closed segments share at least one point. Touching endpoints
/// and collinear overlap count as intersection.
pub fn segments_intersect(s: &Segment, t: &Segment) -> bool {
    let d1 = orient(t.a, t.b, s.a);
    let d2 = orient(t.a, t.b, s.b);
    let d3 = orient(s.a, s.b, t.a);
    let d4 = orient(s.a, s.b, t.b);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }

    (d1 == 0.0 && on_segment(t.a, t.b, s.a))
        || (d2 == 0.0 && on_segment(t.a, t.b, s.b))
        || (d3 == 0.0 && on_segment(s.a, s.b, t.a))
        || (d4 == 0.0 && on_segment(s.a, s.b, t.b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments_intersect() {
        let s = Segment::new(0.0, 0.0, 1.0, 1.0);
        let t = Segment::new(0.0, 1.0, 1.0, 0.0);
        assert!(segments_intersect(&s, &t));
    }

    #[test]
    fn parallel_segments_do_not_intersect() {
        let s = Segment::new(0.0, 0.0, 1.0, 0.0);
        let t = Segment::new(0.0, 0.5, 1.0, 0.5);
        assert!(!segments_intersect(&s, &t));
    }

    #[test]
    fn touching_endpoint_counts() {
        let s = Segment::new(0.0, 0.0, 0.5, 0.5);
        let t = Segment::new(0.5, 0.5, 1.0, 0.0);
        assert!(segments_intersect(&s, &t));
    }

    #[test]
    fn collinear_overlap_counts() {
        let s = Segment::new(0.0, 0.0, 1.0, 0.0);
        let t = Segment::new(0.5, 0.0, 2.0, 0.0);
        assert!(segments_intersect(&s, &t));
    }

    #[test]
    fn collinear_disjoint_does_not() {
        let s = Segment::new(0.0, 0.0, 1.0, 0.0);
        let t = Segment::new(1.5, 0.0, 2.0, 0.0);
        assert!(!segments_intersect(&s, &t));
    }

    #[test]
    fn rect_contains_boundary() {
        let r = Rect::new(0.3, 0.0, 0.7, 0.6);
        assert!(r.contains(0.3, 0.0));
        assert!(r.contains(0.5, 0.5));
        assert!(!r.contains(0.29, 0.5));
    }
}
