//! Dataset pack assembly: ten training and nine test matrices per system,
//! cut from seeded trajectories with the fixed windows of [`PACK_LAYOUT`].

mod io;
mod manifest;
mod noise;
mod table;

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    integrate_ks, integrate_lorenz, InitialCondition, KsParams, LorenzParams, SimConfig,
};
use crate::error::{Error, Result};
use crate::matrix::TimeMatrix;

pub use io::{export_csv, read_pack, write_pack, PackDir, MANIFEST_FILE, MATRIX_EXT};
pub use manifest::{Manifest, MatrixEntry, NoiseSeeds, Parametric, TrajectoryRecord, FORMAT_VERSION};
pub use noise::{add_noise, NoiseLabel, NoiseLevel};
pub use table::{layout_row, LayoutRow, Role, PACK_LAYOUT};

pub const DEFAULT_SPINUP_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Lorenz,
    Ks,
}

impl System {
    pub const LORENZ_ID: &'static str = "ODE_Lorenz";
    pub const KS_ID: &'static str = "PDE_KS";

    pub fn dataset_id(self) -> &'static str {
        match self {
            System::Lorenz => Self::LORENZ_ID,
            System::Ks => Self::KS_ID,
        }
    }

    pub fn from_dataset_id(id: &str) -> Result<Self> {
        id.parse()
    }

    pub fn default_dt(self) -> f64 {
        match self {
            System::Lorenz => 0.01,
            System::Ks => 0.025,
        }
    }

    pub fn nominal_params(self) -> SystemParams {
        match self {
            System::Lorenz => SystemParams::Lorenz(LorenzParams::default()),
            System::Ks => SystemParams::Ks(KsParams::default()),
        }
    }

    /// Name of the parameter varied by the parametric-generalization tasks.
    pub fn varied_parameter(self) -> &'static str {
        match self {
            System::Lorenz => "rho",
            System::Ks => "viscosity",
        }
    }

    pub fn default_parametric(self) -> Parametric {
        let (training, interpolation, extrapolation) = match self {
            System::Lorenz => ([26.0, 28.0, 30.0], 27.0, 33.0),
            System::Ks => ([0.85, 1.0, 1.15], 0.925, 1.30),
        };
        Parametric {
            parameter: self.varied_parameter().to_string(),
            training,
            interpolation,
            extrapolation,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dataset_id())
    }
}

impl FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorenz" | "ode_lorenz" => Ok(System::Lorenz),
            "ks" | "pde_ks" | "kuramoto-sivashinsky" => Ok(System::Ks),
            "sst" | "sea_surface_temperature" => Err(Error::UnsupportedDataset(s.to_string())),
            _ => Err(Error::UnknownDataset(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemParams {
    Lorenz(LorenzParams),
    Ks(KsParams),
}

impl SystemParams {
    pub fn system(&self) -> System {
        match self {
            SystemParams::Lorenz(_) => System::Lorenz,
            SystemParams::Ks(_) => System::Ks,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            SystemParams::Lorenz(_) => 3,
            SystemParams::Ks(p) => p.grid_points,
        }
    }

    /// Value of the parameter varied across parametric trajectories.
    pub fn varied_value(&self) -> f64 {
        match self {
            SystemParams::Lorenz(p) => p.rho,
            SystemParams::Ks(p) => p.viscosity,
        }
    }

    pub fn with_varied_value(&self, value: f64) -> Self {
        match *self {
            SystemParams::Lorenz(p) => SystemParams::Lorenz(LorenzParams { rho: value, ..p }),
            SystemParams::Ks(p) => SystemParams::Ks(KsParams { viscosity: value, ..p }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SystemParams::Lorenz(p) => p.validate(),
            SystemParams::Ks(p) => p.validate(),
        }
    }

    pub fn integrate(&self, cfg: &SimConfig) -> Result<TimeMatrix> {
        match self {
            SystemParams::Lorenz(p) => integrate_lorenz(p, cfg),
            SystemParams::Ks(p) => integrate_ks(p, cfg),
        }
    }
}

/// Optional replacements for the generation defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PackOverrides {
    pub dt: Option<f64>,
    pub spinup_steps: Option<usize>,
    pub noise_medium: Option<f64>,
    pub noise_high: Option<f64>,
    /// Varied parameter of the nominal trajectory.
    pub nominal: Option<f64>,
    pub training: Option<[f64; 3]>,
    pub interpolation: Option<f64>,
    pub extrapolation: Option<f64>,
    /// Recorded verbatim in the manifest; left empty for byte-stable packs.
    pub created_at: Option<String>,
}

/// A complete train/test matrix family plus its manifest. Matrices that are
/// identical by construction share storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPack {
    pub manifest: Manifest,
    pub train: BTreeMap<String, Arc<TimeMatrix>>,
    pub test: BTreeMap<String, Arc<TimeMatrix>>,
}

impl DatasetPack {
    pub fn dataset_id(&self) -> &str {
        &self.manifest.dataset_id
    }

    pub fn system(&self) -> System {
        self.manifest.system
    }

    pub fn get(&self, name: &str) -> Option<&TimeMatrix> {
        self.train.get(name).or_else(|| self.test.get(name)).map(Arc::as_ref)
    }

    /// Checks every matrix against the layout table and the manifest.
    pub fn verify(&self) -> Result<()> {
        self.manifest.validate()?;
        let cols = self.manifest.nominal.dimension();
        for row in &PACK_LAYOUT {
            let map = match row.role {
                Role::Train => &self.train,
                Role::Test => &self.test,
            };
            let m = map
                .get(row.name)
                .ok_or_else(|| Error::InvalidManifest(format!("pack lacks {}", row.name)))?;
            if m.shape() != (row.rows, cols) {
                return Err(Error::ShapeMismatch {
                    name: row.name.to_string(),
                    expected_rows: row.rows,
                    expected_cols: cols,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            if let Some((r, c)) = m.first_non_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
        if self.train.len() + self.test.len() != PACK_LAYOUT.len() {
            return Err(Error::InvalidManifest("pack holds matrices outside the layout".into()));
        }
        Ok(())
    }
}

/// Read access to the matrices of a pack, in memory or on disk.
pub trait PackSource {
    fn manifest(&self) -> &Manifest;

    fn load(&self, name: &str) -> Result<Cow<'_, TimeMatrix>>;
}

impl PackSource for DatasetPack {
    fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn load(&self, name: &str) -> Result<Cow<'_, TimeMatrix>> {
        self.get(name)
            .map(Cow::Borrowed)
            .ok_or_else(|| Error::InvalidManifest(format!("no matrix named {name}")))
    }
}

impl PackSource for PackDir {
    fn manifest(&self) -> &Manifest {
        PackDir::manifest(self)
    }

    fn load(&self, name: &str) -> Result<Cow<'_, TimeMatrix>> {
        PackDir::load(self, name).map(Cow::Owned)
    }
}

/// SplitMix64 finalizer used to derive independent stream seeds.
fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn slice(m: &TimeMatrix, start: usize, end: usize) -> Result<Arc<TimeMatrix>> {
    m.slice_rows(start, end).map(Arc::new)
}

/// Builds a full pack. Deterministic in `(system, master_seed, overrides)`.
pub fn build_pack(system: System, master_seed: u64, overrides: &PackOverrides) -> Result<DatasetPack> {
    use table::{BURN_IN_START, LIMITED_STEPS, TRAIN_STEPS, TRAJECTORY_STEPS};

    let defaults = system.default_parametric();
    let base = system.nominal_params();
    let nominal = base.with_varied_value(overrides.nominal.unwrap_or(base.varied_value()));
    let parametric = Parametric {
        parameter: defaults.parameter,
        training: overrides.training.unwrap_or(defaults.training),
        interpolation: overrides.interpolation.unwrap_or(defaults.interpolation),
        extrapolation: overrides.extrapolation.unwrap_or(defaults.extrapolation),
    };
    let dt = overrides.dt.unwrap_or(system.default_dt());
    let spinup_steps = overrides.spinup_steps.unwrap_or(DEFAULT_SPINUP_STEPS);
    let noise_medium = NoiseLevel::new(
        NoiseLabel::Medium,
        overrides.noise_medium.unwrap_or(NoiseLevel::DEFAULT_MEDIUM),
    )?;
    let noise_high = NoiseLevel::new(
        NoiseLabel::High,
        overrides.noise_high.unwrap_or(NoiseLevel::DEFAULT_HIGH),
    )?;
    parametric.validate()?;
    nominal.validate()?;

    let noise_seeds = NoiseSeeds {
        medium: derive_seed(master_seed, 1),
        high: derive_seed(master_seed, 2),
        limited: derive_seed(master_seed, 3),
    };

    let run = |params: &SystemParams, seed: u64, steps: usize, label: &str| -> Result<TimeMatrix> {
        let started = Instant::now();
        let cfg = SimConfig {
            dt,
            total_steps: steps,
            spinup_steps,
            initial_condition: InitialCondition::SeededRandomSmooth,
            seed,
        };
        let m = params.integrate(&cfg)?;
        log::info!(
            "{}: {label} trajectory ({steps} steps) in {:.2?}",
            system.dataset_id(),
            started.elapsed()
        );
        Ok(m)
    };

    let mut train = BTreeMap::new();
    let mut test = BTreeMap::new();
    let mut records = Vec::new();

    // Forecasting, noise and limited-data tests share one nominal trajectory.
    let seed = derive_seed(master_seed, 0);
    let clean = run(&nominal, seed, TRAJECTORY_STEPS, "nominal")?;
    let x1train = slice(&clean, 0, TRAIN_STEPS)?;
    let x1test = slice(&clean, TRAIN_STEPS, TRAJECTORY_STEPS)?;
    let x4train = slice(&clean, 0, LIMITED_STEPS)?;
    let continuation = slice(&clean, LIMITED_STEPS, LIMITED_STEPS + 1000)?;
    drop(clean);

    train.insert("X2train".into(), Arc::new(add_noise(&x1train, &noise_medium, noise_seeds.medium)?));
    train.insert("X3train".into(), Arc::new(add_noise(&x1train, &noise_high, noise_seeds.high)?));
    train.insert("X5train".into(), Arc::new(add_noise(&x4train, &noise_medium, noise_seeds.limited)?));
    test.insert("X2test".into(), Arc::clone(&x1train));
    test.insert("X4test".into(), Arc::clone(&x1train));
    test.insert("X3test".into(), Arc::clone(&x1test));
    test.insert("X5test".into(), Arc::clone(&x1test));
    test.insert("X6test".into(), Arc::clone(&continuation));
    test.insert("X7test".into(), continuation);
    train.insert("X1train".into(), x1train);
    train.insert("X4train".into(), x4train);
    test.insert("X1test".into(), x1test);
    records.push(TrajectoryRecord {
        label: "nominal".into(),
        params: nominal,
        seed,
        steps: TRAJECTORY_STEPS,
        files: ["X1train", "X1test", "X2train", "X2test", "X3train", "X3test", "X4train", "X4test", "X5train", "X5test", "X6test", "X7test"]
            .map(String::from)
            .to_vec(),
    });

    for (i, &value) in parametric.training.iter().enumerate() {
        let params = nominal.with_varied_value(value);
        let seed = derive_seed(master_seed, 4 + i as u64);
        let name = format!("X{}train", 6 + i);
        let m = run(&params, seed, TRAIN_STEPS, &format!("training {value}"))?;
        train.insert(name.clone(), Arc::new(m));
        records.push(TrajectoryRecord {
            label: format!("training_{}", i + 1),
            params,
            seed,
            steps: TRAIN_STEPS,
            files: vec![name],
        });
    }

    let held_out = [
        ("interpolation", parametric.interpolation, "X9train", "X8test", 7),
        ("extrapolation", parametric.extrapolation, "X10train", "X9test", 8),
    ];
    for (label, value, burn_in, truth, stream) in held_out {
        let params = nominal.with_varied_value(value);
        let seed = derive_seed(master_seed, stream);
        let m = run(&params, seed, TRAJECTORY_STEPS, label)?;
        train.insert(burn_in.into(), slice(&m, BURN_IN_START, TRAIN_STEPS)?);
        test.insert(truth.into(), slice(&m, TRAIN_STEPS, TRAJECTORY_STEPS)?);
        records.push(TrajectoryRecord {
            label: label.into(),
            params,
            seed,
            steps: TRAJECTORY_STEPS,
            files: vec![burn_in.into(), truth.into()],
        });
    }

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dataset_id: system.dataset_id().to_string(),
        system,
        master_seed,
        nominal,
        dt,
        spinup_steps,
        noise_medium,
        noise_high,
        noise_seeds,
        parametric,
        trajectories: records,
        matrices: MatrixEntry::layout(nominal.dimension()),
        created_at: overrides.created_at.clone(),
    };
    let pack = DatasetPack { manifest, train, test };
    pack.verify()?;
    Ok(pack)
}
