//! Units of measure for the quantities appearing in model files.
//!
//! Every magnitude in a model carries a unit symbol. The unit table is
//! closed: it enumerates the symbols the language accepts, their physical
//! dimension and the exact conversion factor into the SI base unit of that
//! dimension (metres, seconds, radians). All downstream consumers (runtime
//! caches, generated setup programs) operate on SI-scaled values only.

use core::f64::consts::PI;
use core::fmt;

/// Physical dimension of a unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Length => write!(f, "LENGTH"),
            Dimension::Time => write!(f, "TIME"),
            Dimension::Angle => write!(f, "ANGLE"),
        }
    }
}

/// Exact conversion factor into the SI base unit of the dimension.
///
/// Factors are kept symbolic so conversions can multiply before dividing
/// and stay exact for integral magnitudes (e.g. `100 cm` is exactly `1 m`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// `num / den` base units per unit.
    Rational(i64, i64),
    /// `pi / n` base units per unit (degrees).
    PiOver(i64),
}

/// One entry of the closed unit table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unit {
    pub symbol: &'static str,
    pub dimension: Dimension,
    pub scale: Scale,
}

/// The full unit table accepted by the language.
pub const UNITS: &[Unit] = &[
    Unit { symbol: "m", dimension: Dimension::Length, scale: Scale::Rational(1, 1) },
    Unit { symbol: "dm", dimension: Dimension::Length, scale: Scale::Rational(1, 10) },
    Unit { symbol: "cm", dimension: Dimension::Length, scale: Scale::Rational(1, 100) },
    Unit { symbol: "mm", dimension: Dimension::Length, scale: Scale::Rational(1, 1000) },
    Unit { symbol: "s", dimension: Dimension::Time, scale: Scale::Rational(1, 1) },
    Unit { symbol: "ms", dimension: Dimension::Time, scale: Scale::Rational(1, 1000) },
    Unit { symbol: "us", dimension: Dimension::Time, scale: Scale::Rational(1, 1_000_000) },
    Unit { symbol: "min", dimension: Dimension::Time, scale: Scale::Rational(60, 1) },
    Unit { symbol: "h", dimension: Dimension::Time, scale: Scale::Rational(3600, 1) },
    Unit { symbol: "rad", dimension: Dimension::Angle, scale: Scale::Rational(1, 1) },
    Unit { symbol: "deg", dimension: Dimension::Angle, scale: Scale::PiOver(180) },
];

/// Looks a symbol up in the unit table.
pub fn lookup_unit(symbol: &str) -> Option<&'static Unit> {
    UNITS.iter().find(|u| u.symbol == symbol)
}

/// A magnitude paired with its declared unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantity {
    pub magnitude: f64,
    pub unit: &'static Unit,
}

impl Quantity {
    pub fn new(magnitude: f64, unit: &'static Unit) -> Self {
        Quantity { magnitude, unit }
    }

    /// Converts into the SI base unit of the quantity's dimension.
    ///
    /// Rational factors multiply before dividing, so integral magnitudes of
    /// decimal sub-units convert without rounding error.
    pub fn to_si(&self) -> f64 {
        match self.unit.scale {
            Scale::Rational(num, den) => self.magnitude * num as f64 / den as f64,
            Scale::PiOver(den) => self.magnitude * PI / den as f64,
        }
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.magnitude, self.unit.symbol)
    }
}

/// Integral nanoseconds per one unit, defined for every TIME unit.
fn nanos_per_unit(unit: &Unit) -> Option<i64> {
    if unit.dimension != Dimension::Time {
        return None;
    }
    match unit.scale {
        // Every table entry divides a nanosecond count exactly.
        Scale::Rational(num, den) => Some(num * 1_000_000_000 / den),
        Scale::PiOver(_) => None,
    }
}

/// Converts a TIME quantity into integer nanoseconds, rounding half to even.
///
/// Returns `None` for non-TIME quantities and for values outside the `i64`
/// nanosecond range.
pub fn time_to_nanos(q: &Quantity) -> Option<i64> {
    let per = nanos_per_unit(q.unit)? as f64;
    let exact = q.magnitude * per;
    if !exact.is_finite() {
        return None;
    }
    let rounded = libm::rint(exact);
    // i64::MAX + 1 is exactly representable as f64; i64::MIN is too.
    const BOUND: f64 = 9_223_372_036_854_775_808.0;
    if !(-BOUND..BOUND).contains(&rounded) {
        return None;
    }
    Some(rounded as i64)
}
