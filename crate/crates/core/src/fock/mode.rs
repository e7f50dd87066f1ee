use std::fmt;

use serde::{Deserialize, Serialize};

/// Polarization label of an optical mode.
///
/// `Plus`/`Minus` are the diagonal states reached by a 45° rotation; `None`
/// is used for polarization-free (scalar) circuits such as the bare router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
    Plus,
    Minus,
    None,
}

impl Polarization {
    pub fn is_rectilinear(self) -> bool {
        matches!(self, Polarization::H | Polarization::V)
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Polarization::Plus | Polarization::Minus)
    }

    fn suffix(self) -> &'static str {
        match self {
            Polarization::H => "_H",
            Polarization::V => "_V",
            Polarization::Plus => "_+",
            Polarization::Minus => "_-",
            Polarization::None => "",
        }
    }
}

/// One optical mode: spatial label, polarization, and whether it is an
/// undetected loss sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub spatial: String,
    pub polarization: Polarization,
    pub sink: bool,
}

impl ModeId {
    pub fn new(spatial: impl Into<String>, polarization: Polarization) -> Self {
        ModeId { spatial: spatial.into(), polarization, sink: false }
    }

    pub fn sink(spatial: impl Into<String>, polarization: Polarization) -> Self {
        ModeId { spatial: spatial.into(), polarization, sink: true }
    }

    pub fn h(spatial: impl Into<String>) -> Self {
        Self::new(spatial, Polarization::H)
    }

    pub fn v(spatial: impl Into<String>) -> Self {
        Self::new(spatial, Polarization::V)
    }

    pub fn scalar(spatial: impl Into<String>) -> Self {
        Self::new(spatial, Polarization::None)
    }

    /// Same spatial label and sink flag, different polarization.
    pub fn with_polarization(&self, polarization: Polarization) -> Self {
        ModeId { polarization, ..self.clone() }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sink {
            f.write_str("~")?;
        }
        write!(f, "{}{}", self.spatial, self.polarization.suffix())
    }
}
