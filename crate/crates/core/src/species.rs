//! Ion species data.

use crate::constants::{ATOMIC_MASS_UNIT, ELECTRON_MASS, ELEMENTARY_CHARGE};
use crate::{Error, Result};

/// One optical transition of the species.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub label: &'static str,
    /// Vacuum wavelength in m.
    pub wavelength: f64,
    /// Lifetime of the upper level in s.
    pub lifetime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: &'static str,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
    pub transitions: Vec<Transition>,
}

impl IonSpecies {
    /// Singly ionised calcium-40 with its low-lying level catalog.
    pub fn calcium40() -> Self {
        IonSpecies {
            name: "40Ca+",
            mass: 39.962_590_863 * ATOMIC_MASS_UNIT - ELECTRON_MASS,
            charge: ELEMENTARY_CHARGE,
            transitions: vec![
                Transition {
                    label: "S1/2-P1/2",
                    wavelength: 396.847e-9,
                    lifetime: 7.1e-9,
                },
                Transition {
                    label: "S1/2-P3/2",
                    wavelength: 393.366e-9,
                    lifetime: 6.9e-9,
                },
                Transition {
                    label: "S1/2-D3/2",
                    wavelength: 732.389e-9,
                    lifetime: 1.08,
                },
                Transition {
                    label: "S1/2-D5/2",
                    wavelength: 729.147e-9,
                    lifetime: 1.05,
                },
                Transition {
                    label: "D3/2-P1/2",
                    wavelength: 866.214e-9,
                    lifetime: 7.1e-9,
                },
                Transition {
                    label: "D5/2-P3/2",
                    wavelength: 854.209e-9,
                    lifetime: 6.9e-9,
                },
            ],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ca40" | "40ca+" | "ca+" => Ok(Self::calcium40()),
            other => Err(Error::domain(format!("unknown species `{other}`"))),
        }
    }

    pub fn transition(&self, label: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.label == label)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) || !(self.charge > 0.0) {
            return Err(Error::domain("species mass and charge must be positive"));
        }
        if let Some(t) = self
            .transitions
            .iter()
            .find(|t| !(t.wavelength > 0.0) || !(t.lifetime > 0.0))
        {
            return Err(Error::domain(format!(
                "transition {} has a non-positive wavelength or lifetime",
                t.label
            )));
        }
        Ok(())
    }
}
