use serde::{Deserialize, Serialize};

use crate::error::{PumpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Counterclockwise,
    Clockwise,
}

/// Closed polygon in the `(U_-, U_+)` plane, traversed in vertex order.
///
/// The same type describes one-body cycles, with the vertices read as the
/// potentials `(v_-, v_+)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpCycle {
    vertices: Vec<(f64, f64)>,
    period: f64,
}

impl PumpCycle {
    /// `vertices` must start and end on the same point.
    pub fn new(vertices: Vec<(f64, f64)>, period: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(PumpError::invalid(
                "cycle",
                "needs at least two legs (three vertices including the closing one)",
            ));
        }
        if vertices.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(PumpError::invalid("cycle", "vertices must be finite"));
        }
        if vertices.first() != vertices.last() {
            return Err(PumpError::invalid("cycle", "first and last vertex must coincide"));
        }
        if !(period > 0.0) || !period.is_finite() {
            return Err(PumpError::invalid("period", format!("{period} must be positive")));
        }
        Ok(PumpCycle { vertices, period })
    }

    /// Counterclockwise square
    /// `(lo,lo) -> (hi,lo) -> (hi,hi) -> (lo,hi) -> (lo,lo)`.
    pub fn square(u_min: f64, u_max: f64, period: f64) -> Result<Self> {
        if u_min > u_max {
            return Err(PumpError::invalid(
                "square cycle",
                format!("u_min {u_min} exceeds u_max {u_max}"),
            ));
        }
        Self::new(
            vec![
                (u_min, u_min),
                (u_max, u_min),
                (u_max, u_max),
                (u_min, u_max),
                (u_min, u_min),
            ],
            period,
        )
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn legs(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn leg_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        PumpCycle {
            vertices,
            period: self.period,
        }
    }

    /// Exchange the roles of the two impurities, `(a, b) -> (b, a)`.
    pub fn mirrored(&self) -> Self {
        PumpCycle {
            vertices: self.vertices.iter().map(|&(a, b)| (b, a)).collect(),
            period: self.period,
        }
    }

    /// Shoelace area with `U_-` on the horizontal axis; positive when
    /// counterclockwise.
    pub fn signed_area(&self) -> f64 {
        0.5 * self
            .legs()
            .map(|((x0, y0), (x1, y1))| x0 * y1 - x1 * y0)
            .sum::<f64>()
    }

    /// `None` for cycles enclosing no net area.
    pub fn orientation(&self) -> Option<Orientation> {
        let a = self.signed_area();
        if a > 0.0 {
            Some(Orientation::Counterclockwise)
        } else if a < 0.0 {
            Some(Orientation::Clockwise)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_geometry() {
        let c = PumpCycle::square(0.5, 4.0, 1.0).unwrap();
        assert_eq!(c.leg_count(), 4);
        assert!((c.signed_area() - 3.5 * 3.5).abs() < 1e-12);
        assert_eq!(c.orientation(), Some(Orientation::Counterclockwise));
        assert_eq!(c.reversed().orientation(), Some(Orientation::Clockwise));
        assert_eq!(c.mirrored().orientation(), Some(Orientation::Clockwise));
        assert_eq!(c.reversed().reversed(), c);
    }

    #[test]
    fn rejects_open_or_short_paths() {
        assert!(PumpCycle::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)], 1.0).is_err());
        assert!(PumpCycle::new(vec![(0.0, 0.0), (0.0, 0.0)], 1.0).is_err());
        assert!(PumpCycle::new(vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)], 0.0).is_err());
        assert!(PumpCycle::square(2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn out_and_back_has_no_area() {
        let c = PumpCycle::new(vec![(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)], 1.0).unwrap();
        assert_eq!(c.signed_area(), 0.0);
        assert_eq!(c.orientation(), None);
    }
}
