use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

/// Values of an atom that has no closed form, known on the grid it was
/// built from. Off-grid evaluation returns the value at the nearest point.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub points: Arc<[f64]>,
    pub values: Vec<f64>,
}

impl Sampled {
    fn at(&self, x: f64) -> f64 {
        let pts = &self.points;
        let idx = pts.partition_point(|&p| p < x);
        let nearest = if idx == 0 {
            0
        } else if idx == pts.len() {
            pts.len() - 1
        } else if x - pts[idx - 1] <= pts[idx] - x {
            idx - 1
        } else {
            idx
        };
        self.values[nearest]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AtomKind {
    /// The constant function 1 on `[0, 1]`.
    Constant,
    /// Haar father wavelet, 1 on `[0, 1]`.
    HaarScaling,
    /// `2^{level/2} psi(2^level x - shift)` with `psi = 1_[0,1/2] - 1_(1/2,1]`.
    Haar { level: u32, shift: u32 },
    /// Periodized Daubechies function; `level == None` is the coarsest
    /// scaling function.
    Daubechies {
        moments: usize,
        level: Option<u32>,
        shift: u32,
        sampled: Sampled,
    },
    /// `sqrt(2) cos(2 pi freq x)`.
    Cosine { freq: u32 },
    /// `sqrt(2) sin(2 pi freq x)`.
    Sine { freq: u32 },
    /// `delta^{-1/2} 1_(delta (bin-1), delta bin]`, bins numbered from 1.
    Histogram { bin: u32, delta: f64 },
}

/// One dictionary element `phi_j`, normalized in `L2([0, 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub kind: AtomKind,
}

/// `psi(x) = 1` on `[0, 1/2]`, `-1` on `(1/2, 1]`, 0 elsewhere.
pub fn haar_mother(x: f64) -> f64 {
    if (0.0..=0.5).contains(&x) {
        1.0
    } else if x > 0.5 && x <= 1.0 {
        -1.0
    } else {
        0.0
    }
}

/// Index `l` with `x` in `(delta (l-1), delta l]`; `x = 0` falls in bin 1.
pub fn histogram_bin(x: f64, delta: f64) -> u32 {
    let t = x / delta;
    ((t - 1e-12).ceil().max(1.0)) as u32
}

impl Atom {
    pub fn new(kind: AtomKind) -> Self {
        Self { kind }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            AtomKind::Constant | AtomKind::HaarScaling => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            AtomKind::Haar { level, shift } => {
                let scale = f64::from(1u32 << level);
                scale.sqrt() * haar_mother(scale * x - f64::from(*shift))
            }
            AtomKind::Daubechies { sampled, .. } => sampled.at(x),
            AtomKind::Cosine { freq } => SQRT_2 * (2.0 * PI * f64::from(*freq) * x).cos(),
            AtomKind::Sine { freq } => SQRT_2 * (2.0 * PI * f64::from(*freq) * x).sin(),
            AtomKind::Histogram { bin, delta } => {
                if (0.0..=1.0).contains(&x) && histogram_bin(x, *delta) == *bin {
                    delta.powf(-0.5)
                } else {
                    0.0
                }
            }
        }
    }

    /// Wavelet resolution level used for scale-dependent thresholds;
    /// 0 for scaling functions and non-wavelet atoms.
    pub fn scale(&self) -> u32 {
        match &self.kind {
            AtomKind::Haar { level, .. } => *level,
            AtomKind::Daubechies {
                level: Some(level), ..
            } => *level,
            _ => 0,
        }
    }

    /// Atoms sharing a class (within one system) may be grouped together.
    pub(crate) fn group_class(&self) -> i64 {
        match &self.kind {
            AtomKind::Haar { level, .. } => i64::from(*level),
            AtomKind::Daubechies {
                level: Some(level), ..
            } => i64::from(*level),
            AtomKind::HaarScaling | AtomKind::Daubechies { level: None, .. } => -1,
            _ => -2,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::Constant => write!(f, "const"),
            AtomKind::HaarScaling => write!(f, "haar.phi"),
            AtomKind::Haar { level, shift } => write!(f, "haar({level},{shift})"),
            AtomKind::Daubechies {
                moments,
                level: None,
                shift,
                ..
            } => {
                write!(f, "db{moments}.phi({shift})")
            }
            AtomKind::Daubechies {
                moments,
                level: Some(level),
                shift,
                ..
            } => {
                write!(f, "db{moments}({level},{shift})")
            }
            AtomKind::Cosine { freq } => write!(f, "cos({freq})"),
            AtomKind::Sine { freq } => write!(f, "sin({freq})"),
            AtomKind::Histogram { bin, .. } => write!(f, "hist({bin})"),
        }
    }
}
