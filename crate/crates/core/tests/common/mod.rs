#![allow(dead_code)]

use std::ffi::CString;
use std::path::Path;
use std::sync::Mutex;

use biloc::instance::{generate, GeneratorParams, Instance};

/// HiGHS keeps global state; one solve at a time.
static HIGHS: Mutex<()> = Mutex::new(());

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum External {
    Optimal(f64),
    Infeasible,
    Other(i32),
}

/// Raw HiGHS outcome: model status, incumbent objective and dual bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighsRun {
    pub status: i32,
    pub objective: f64,
    pub bound: f64,
}

pub const HIGHS_TIME_LIMIT: i32 = 13;

/// Reads an LP file with HiGHS and solves it to a 1e-9 gap or until
/// `time_limit` seconds.
pub fn highs_run(path: &Path, time_limit: Option<f64>) -> HighsRun {
    let _guard = HIGHS.lock().unwrap_or_else(|e| e.into_inner());
    let file = CString::new(path.to_str().expect("utf-8 path")).unwrap();
    unsafe {
        let h = highs_sys::Highs_create();
        let opt = |name: &str| CString::new(name).unwrap();
        highs_sys::Highs_setBoolOptionValue(h, opt("output_flag").as_ptr(), 0);
        highs_sys::Highs_setDoubleOptionValue(h, opt("mip_rel_gap").as_ptr(), 1e-9);
        highs_sys::Highs_setDoubleOptionValue(h, opt("mip_abs_gap").as_ptr(), 1e-9);
        if let Some(t) = time_limit {
            highs_sys::Highs_setDoubleOptionValue(h, opt("time_limit").as_ptr(), t);
        }
        let read = highs_sys::Highs_readModel(h, file.as_ptr());
        assert!(read != highs_sys::STATUS_ERROR, "HiGHS could not read {}", path.display());
        highs_sys::Highs_run(h);
        let status = highs_sys::Highs_getModelStatus(h) as i32;
        let objective = highs_sys::Highs_getObjectiveValue(h);
        let mut bound = f64::NAN;
        highs_sys::Highs_getDoubleInfoValue(h, opt("mip_dual_bound").as_ptr(), &mut bound);
        highs_sys::Highs_destroy(h);
        HighsRun { status, objective, bound }
    }
}

/// Solves an LP file with HiGHS to optimality.
pub fn highs_solve(path: &Path) -> External {
    let run = highs_run(path, None);
    match run.status {
        s if s == highs_sys::MODEL_STATUS_OPTIMAL as i32 => External::Optimal(run.objective),
        s if s == highs_sys::MODEL_STATUS_INFEASIBLE as i32 => External::Infeasible,
        s => External::Other(s),
    }
}

/// Member `seed` of the small family: at most 2 facilities, shippers,
/// categories, services and prices, and at most 4 customers.
pub fn tiny_params(seed: u64) -> GeneratorParams {
    let facilities = 1 + (seed % 2) as usize;
    let shippers = 1 + (seed / 2 % 2) as usize;
    let categories = 1 + (seed / 4 % 2) as usize;
    let services = 1 + (seed / 8 % 2) as usize;
    let prices = 1 + (seed / 16 % 2) as usize;
    let customers = (shippers * categories).max(2 + (seed / 3 % 3) as usize).min(4);
    let ratio = [0.7, 1.0, 1.5, 2.5][(seed / 5 % 4) as usize];
    let alpha = [0.0, -0.05, -0.1][(seed / 7 % 3) as usize];
    GeneratorParams {
        facilities,
        customers,
        shippers,
        categories,
        services,
        prices,
        ratio,
        alpha,
        seed: 1000 + seed,
        ..GeneratorParams::default()
    }
}

pub fn tiny(seed: u64) -> Instance {
    generate(&tiny_params(seed)).expect("tiny instance")
}

pub fn desk(seed: u64, alpha: f64) -> Instance {
    generate(&GeneratorParams { seed, alpha, ..GeneratorParams::default() }).expect("desk instance")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
