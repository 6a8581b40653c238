//! Parameter sets of the published figures, in units of γ.

use std::fmt;
use std::str::FromStr;

use super::{HarnessError, Scenario};
use crate::model::SystemParams;

const BANDWIDTH: f64 = 0.01;
const SLOW_VELOCITIES: [f64; 4] = [0.0, 0.01, 0.1, 1.0];
const FAST_VELOCITIES: [f64; 4] = [10.0, 20.0, 30.0, 40.0];
/// Velocity step of the concurrence-versus-velocity figure.
pub const VELOCITY_STEP: f64 = 5.0;
/// Last multiple of the step in the default and extended grids.
pub const VELOCITY_STEPS_DEFAULT: u32 = 8;
pub const VELOCITY_STEPS_FULL: u32 = 20;
/// Observation time of the concurrence-versus-velocity figure.
pub const VELOCITY_FIGURE_TIME: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FigureName {
    pub const ALL: [FigureName; 6] = [
        FigureName::Fig2,
        FigureName::Fig3,
        FigureName::Fig4,
        FigureName::Fig5,
        FigureName::Fig6,
        FigureName::Fig7,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig3 => "fig3",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
            FigureName::Fig7 => "fig7",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureName::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| HarnessError::UnknownPreset(s.to_string()))
    }
}

/// What the plot script draws for each scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlotQuantity {
    Concurrence,
    DecayRate,
    /// Concurrence at a fixed time against `βω₀`.
    ConcurrenceVsVelocity { at_gamma_t: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureLayout {
    pub name: FigureName,
    pub quantity: PlotQuantity,
    pub panels: Vec<Panel>,
}

impl FigureLayout {
    pub fn scenarios(&self) -> impl Iterator<Item = &Scenario> {
        self.panels.iter().flat_map(|p| p.scenarios.iter())
    }
}

fn scenario(label: String, lambda: f64, delta: f64, bw: f64) -> Scenario {
    Scenario::new(label, SystemParams::new(lambda, delta, bw))
}

fn velocity_panel(fig: &str, title: &str, velocities: &[f64]) -> Panel {
    Panel {
        title: title.to_string(),
        scenarios: velocities
            .iter()
            .map(|&bw| scenario(format!("{fig}_bw{bw}"), BANDWIDTH, 0.0, bw))
            .collect(),
    }
}

/// Panels and scenarios of a figure. `full_velocity_range` extends the
/// velocity grid of fig4 from `n ≤ 8` to `n ≤ 20`.
pub fn figure_layout(name: FigureName, full_velocity_range: bool) -> FigureLayout {
    let letters = ['a', 'b', 'c', 'd'];
    let (quantity, panels) = match name {
        FigureName::Fig2 => (
            PlotQuantity::Concurrence,
            vec![velocity_panel("fig2", "", &SLOW_VELOCITIES)],
        ),
        FigureName::Fig3 => (
            PlotQuantity::Concurrence,
            vec![velocity_panel("fig3", "", &FAST_VELOCITIES)],
        ),
        FigureName::Fig4 => {
            let steps = if full_velocity_range {
                VELOCITY_STEPS_FULL
            } else {
                VELOCITY_STEPS_DEFAULT
            };
            let grid: Vec<f64> = (0..=steps).map(|n| VELOCITY_STEP * f64::from(n)).collect();
            (
                PlotQuantity::ConcurrenceVsVelocity {
                    at_gamma_t: VELOCITY_FIGURE_TIME,
                },
                vec![velocity_panel("fig4", "", &grid)],
            )
        }
        FigureName::Fig5 => {
            let all: Vec<f64> = SLOW_VELOCITIES.into_iter().chain(FAST_VELOCITIES).collect();
            let panels = all
                .chunks(2)
                .zip(letters)
                .map(|(pair, letter)| velocity_panel(&format!("fig5{letter}"), &format!("({letter})"), pair))
                .collect();
            (PlotQuantity::DecayRate, panels)
        }
        FigureName::Fig6 => {
            let panels = [0.0, 0.5, 5.0, 10.0]
                .into_iter()
                .zip(letters)
                .map(|(bw, letter)| Panel {
                    title: format!("({letter}) bw = {bw}"),
                    scenarios: [0.01, 0.1, 1.0]
                        .into_iter()
                        .map(|lambda| scenario(format!("fig6{letter}_lambda{lambda}"), lambda, 0.0, bw))
                        .collect(),
                })
                .collect();
            (PlotQuantity::Concurrence, panels)
        }
        FigureName::Fig7 => {
            let panels = [0.0, 0.1, 0.3, 0.5]
                .into_iter()
                .zip(letters)
                .map(|(bw, letter)| Panel {
                    title: format!("({letter}) bw = {bw}"),
                    scenarios: [0.01, 0.05, 0.1, 0.5]
                        .into_iter()
                        .map(|delta| scenario(format!("fig7{letter}_delta{delta}"), BANDWIDTH, delta, bw))
                        .collect(),
                })
                .collect();
            (PlotQuantity::Concurrence, panels)
        }
    };
    FigureLayout {
        name,
        quantity,
        panels,
    }
}

/// Scenarios of a named figure with the default velocity range.
pub fn figure_preset(name: &str) -> Result<Vec<Scenario>, HarnessError> {
    let layout = figure_layout(name.parse()?, false);
    Ok(layout.scenarios().cloned().collect())
}
