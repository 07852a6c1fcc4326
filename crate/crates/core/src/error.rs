use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point lies within {distance:e} of the projection pole (minimum {min:e})")]
    PoleTooClose { distance: f64, min: f64 },

    #[error("curve degenerates: interpolated point has norm {norm:e}")]
    DegenerateCurve { norm: f64 },

    #[error("curve needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },

    #[error("components {first} and {second} come within {distance:e} of each other (minimum {min:e})")]
    ComponentsTooClose {
        first: usize,
        second: usize,
        distance: f64,
        min: f64,
    },

    #[error("near-degenerate triple at (s,t,u) = ({s:.6}, {t:.6}, {u:.6}): |F| = {norm:e}")]
    NearDegenerateTriple { s: f64, t: f64, u: f64, norm: f64 },

    #[error("invalid grid size {n}: {reason}")]
    InvalidGrid { n: usize, reason: &'static str },

    #[error("grid size {n} exceeds the brute-force limit of {max}")]
    GridTooLarge { n: usize, max: usize },

    #[error("degree integral on the subtorus with {axis} frozen is {raw:.6}, too far from an integer")]
    DegenerateDegree { axis: Axis, raw: f64 },

    #[error("pairwise linking nonzero (p, q, r) = ({p}, {q}, {r}); the helicity formula needs all three to vanish")]
    NonzeroLinking { p: i64, q: i64, r: i64 },

    #[error("curves come within {distance:e} of each other (minimum {min:e})")]
    CurvesTooClose { distance: f64, min: f64 },

    #[error("field size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

/// One of the three torus parameters `s`, `t`, `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    S,
    T,
    U,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::S, Axis::T, Axis::U];

    pub fn index(self) -> usize {
        match self {
            Axis::S => 0,
            Axis::T => 1,
            Axis::U => 2,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::S => "s",
            Axis::T => "t",
            Axis::U => "u",
        })
    }
}
