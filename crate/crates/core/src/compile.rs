//! Assembles a full scheduling model: skeleton plus one changeover
//! formulation plus an optional window mechanism.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compact::{self, CompactVars, CompactWindowError};
use crate::core_constraints::{build_core, CoreBuild};
use crate::instance::Instance;
use crate::legacy::{self, EventWindowAssignment, LegacyVars, WindowError};
use crate::model::{LinearModel, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Legacy,
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowMode {
    /// No changeover blockages.
    None,
    /// Event points assigned to intervals (legacy only).
    Assign,
    /// Window choice variables (compact only).
    Explicit,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Legacy => "legacy",
            Formulation::Compact => "compact",
        })
    }
}

impl fmt::Display for WindowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowMode::None => "none",
            WindowMode::Assign => "assign",
            WindowMode::Explicit => "explicit",
        })
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "legacy" => Ok(Formulation::Legacy),
            "compact" => Ok(Formulation::Compact),
            other => Err(format!("unknown formulation {other:?} (legacy|compact)")),
        }
    }
}

impl FromStr for WindowMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(WindowMode::None),
            "assign" => Ok(WindowMode::Assign),
            "explicit" => Ok(WindowMode::Explicit),
            other => Err(format!("unknown window mode {other:?} (none|assign|explicit)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub formulation: Formulation,
    pub windows: WindowMode,
}

impl CompileOptions {
    pub fn new(formulation: Formulation, windows: WindowMode) -> Self {
        CompileOptions { formulation, windows }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("window mode {windows} cannot be combined with the {formulation} formulation")]
    Incompatible {
        formulation: Formulation,
        windows: WindowMode,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Windows(#[from] WindowError),
    #[error(transparent)]
    CompactWindows(#[from] CompactWindowError),
}

/// A compiled model with the handles needed to read solutions back.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub options: CompileOptions,
    pub model: LinearModel,
    pub core: CoreBuild,
    pub legacy: Option<LegacyVars>,
    pub compact: Option<CompactVars>,
    pub assignment: Option<EventWindowAssignment>,
}

impl Compiled {
    /// Group-tag prefix of the changeover rows of this formulation.
    pub fn changeover_prefix(&self) -> &'static str {
        match self.options.formulation {
            Formulation::Legacy => "legacy.",
            Formulation::Compact => "compact.",
        }
    }
}

pub fn compile(inst: &Instance, options: CompileOptions) -> Result<Compiled, CompileError> {
    match (options.formulation, options.windows) {
        (Formulation::Legacy, WindowMode::Explicit) | (Formulation::Compact, WindowMode::Assign) => {
            return Err(CompileError::Incompatible {
                formulation: options.formulation,
                windows: options.windows,
            })
        }
        _ => {}
    }
    let (mut model, core) = build_core(inst)?;
    model.name = format!("evsched-{}", options.formulation);
    let mut out = Compiled {
        options,
        model,
        core,
        legacy: None,
        compact: None,
        assignment: None,
    };
    match options.formulation {
        Formulation::Legacy => {
            out.legacy = Some(legacy::build_legacy(inst, &out.core, &mut out.model)?);
            if options.windows == WindowMode::Assign {
                let a = legacy::assign_event_windows(inst)?;
                legacy::build_assigned_windows(inst, &out.core, &a, &mut out.model)?;
                out.assignment = Some(a);
            }
        }
        Formulation::Compact => {
            let mut vars = compact::build_compact(inst, &out.core, &mut out.model)?;
            if options.windows == WindowMode::Explicit {
                compact::build_windows(inst, &out.core, &mut vars, &mut out.model)?;
            }
            out.compact = Some(vars);
        }
    }
    Ok(out)
}
