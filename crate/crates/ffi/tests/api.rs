use std::ffi::{c_void, CStr, CString};
use std::ptr;

use fode_core::{GridSpec, NamedSystem, Strategy};
use fode_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { fode_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_owned();
    assert_eq!(n, s.len());
    s
}

fn named(system: &str, params: &[f64], alpha: f64, t_end: f64, y0: &[f64]) -> Result<*mut FodeProblem, FodeStatus> {
    let name = CString::new(system).unwrap();
    let mut out = ptr::null_mut();
    let s = unsafe {
        fode_problem_new_named(name.as_ptr(), params.as_ptr(), params.len(), alpha, t_end, y0.as_ptr(), y0.len(), &mut out)
    };
    if s == FodeStatus::Ok {
        assert!(!out.is_null());
        Ok(out)
    } else {
        assert!(out.is_null());
        Err(s)
    }
}

fn solve(p: *const FodeProblem, n: usize, kind: FodeStrategyKind, workers: usize, chunk: usize) -> Result<*mut FodeTrajectory, FodeStatus> {
    let mut out = ptr::null_mut();
    match unsafe { fode_solve(p, n, kind, workers, chunk, &mut out) } {
        FodeStatus::Ok => Ok(out),
        s => Err(s),
    }
}

unsafe fn states<'a>(t: *const FodeTrajectory) -> &'a [f64] {
    std::slice::from_raw_parts(fode_trajectory_states(t), fode_trajectory_len(t) * fode_trajectory_dim(t))
}

#[test]
fn named_system_matches_the_rust_solver() {
    let p = named("hindmarsh-rose", &[], 0.9, 20.0, &[]).unwrap();
    assert_eq!(unsafe { fode_problem_dim(p) }, 3);
    let reference = NamedSystem::HindmarshRose(Default::default()).problem(0.9, 20.0, None).unwrap();
    let grid = GridSpec::for_problem(&reference, 2000).unwrap();
    for (kind, strategy) in [
        (FodeStrategyKind::Serial, Strategy::Serial),
        (FodeStrategyKind::Block, Strategy::Block { workers: 3 }),
        (FodeStrategyKind::Reduction, Strategy::Reduction { workers: 3, chunk: 64 }),
    ] {
        let t = solve(p, 2000, kind, 3, 64).unwrap();
        let expect = fode_core::solve(&reference, grid, strategy).unwrap();
        unsafe {
            assert_eq!(fode_trajectory_len(t), 2001);
            assert_eq!(fode_trajectory_dim(t), 3);
            assert_eq!(states(t), expect.states());
            let times = std::slice::from_raw_parts(fode_trajectory_times(t), 2001);
            assert_eq!(times[2000], 20.0);
            let mut row = [0.0; 3];
            assert_eq!(fode_trajectory_state(t, 1234, row.as_mut_ptr(), 3), FodeStatus::Ok);
            assert_eq!(&row, expect.state(1234));
            fode_trajectory_free(t);
        }
    }
    unsafe { fode_problem_free(p) };
}

unsafe extern "C" fn decay(user_data: *mut c_void, _t: f64, y: *const f64, dy: *mut f64, dim: usize) {
    let lambda = *(user_data as *const f64);
    for i in 0..dim {
        *dy.add(i) = lambda * *y.add(i);
    }
}

#[test]
fn callback_problem_agrees_with_named_linear() {
    let mut lambda = -1.0f64;
    let y0 = [1.0, 2.0];
    let mut p = ptr::null_mut();
    let s = unsafe {
        fode_problem_new_callback(Some(decay), &mut lambda as *mut f64 as *mut c_void, 0.5, 1.0, y0.as_ptr(), 2, &mut p)
    };
    assert_eq!(s, FodeStatus::Ok);
    let q = named("linear", &[-1.0], 0.5, 1.0, &y0).unwrap();
    let a = solve(p, 500, FodeStrategyKind::Reduction, 2, 32).unwrap();
    let b = solve(q, 500, FodeStrategyKind::Reduction, 2, 32).unwrap();
    unsafe {
        assert_eq!(states(a), states(b));
        let end = states(a)[1000];
        assert!((end - 0.427_583_576_155_807).abs() < 1e-3, "{end}");
        fode_trajectory_free(a);
        fode_trajectory_free(b);
        fode_problem_free(p);
        fode_problem_free(q);
    }
}

#[test]
fn errors_map_to_status_codes() {
    assert_eq!(named("lorenz", &[], 0.5, 1.0, &[]).unwrap_err(), FodeStatus::Config);
    assert!(last_error().contains("lorenz"));
    assert_eq!(named("linear", &[], 1.5, 1.0, &[]).unwrap_err(), FodeStatus::Domain);
    assert!(last_error().contains("(0, 1]"));

    let p = named("linear", &[1e300], 0.5, 1.0, &[]).unwrap();
    assert_eq!(solve(p, 10, FodeStrategyKind::Block, 3, 0).unwrap_err(), FodeStatus::Step);
    let mut step = 0usize;
    assert!(unsafe { fode_last_error_step(&mut step) });
    assert_eq!(step, 1);
    assert_eq!(solve(p, 10, FodeStrategyKind::Block, 0, 0).unwrap_err(), FodeStatus::Config);
    assert!(!unsafe { fode_last_error_step(&mut step) });

    let t = solve(p, 0, FodeStrategyKind::Serial, 1, 0);
    assert!(t.is_err());
    unsafe { fode_problem_free(p) };

    // success clears the message
    let mut g = 0.0;
    assert_eq!(unsafe { fode_gamma(0.5, &mut g) }, FodeStatus::Ok);
    assert_eq!(last_error(), "");
    assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-15);
}

#[test]
fn null_and_index_arguments() {
    unsafe {
        assert_eq!(fode_solve(ptr::null(), 10, FodeStrategyKind::Serial, 1, 0, &mut ptr::null_mut()), FodeStatus::NullPointer);
        assert_eq!(
            fode_problem_new_callback(None, ptr::null_mut(), 0.5, 1.0, [1.0].as_ptr(), 1, &mut ptr::null_mut()),
            FodeStatus::NullPointer
        );
        assert_eq!(fode_gamma(1.0, ptr::null_mut()), FodeStatus::NullPointer);
        assert_eq!(fode_trajectory_len(ptr::null()), 0);
        assert!(fode_trajectory_states(ptr::null()).is_null());
        fode_trajectory_free(ptr::null_mut());
        fode_problem_free(ptr::null_mut());

        let p = named("zero", &[], 0.3, 1.0, &[3.0, 4.0]).unwrap();
        let t = solve(p, 8, FodeStrategyKind::Serial, 1, 0).unwrap();
        let mut row = [0.0; 2];
        assert_eq!(fode_trajectory_state(t, 9, row.as_mut_ptr(), 2), FodeStatus::Index);
        assert_eq!(fode_trajectory_state(t, 8, row.as_mut_ptr(), 1), FodeStatus::Index);
        assert_eq!(fode_trajectory_state(t, 8, row.as_mut_ptr(), 2), FodeStatus::Ok);
        assert_eq!(row, [3.0, 4.0]);
        fode_trajectory_free(t);
        fode_problem_free(p);
    }
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(fode_predictor_weight(0.5, 0, &mut v), FodeStatus::Ok);
        assert_eq!(v, fode_core::predictor_weight(0.5, 0).unwrap());
        assert_eq!(fode_corrector_weight_a(1.0, 3, &mut v), FodeStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(fode_corrector_weight_c(0.7, 5, &mut v), FodeStatus::Ok);
        assert_eq!(v, fode_core::corrector_weight_c(0.7, 5).unwrap());
        assert_eq!(fode_predictor_weight(0.0, 1, &mut v), FodeStatus::Domain);
        assert_eq!(fode_mittag_leffler(0.5, -1.0, &mut v), FodeStatus::Ok);
        assert!((v - 0.427_583_576_155_807).abs() < 1e-14);
        assert_eq!(fode_mittag_leffler(0.5, -20.0, &mut v), FodeStatus::OutOfRange);
        assert_eq!(fode_gamma(11.0, &mut v), FodeStatus::Ok);
        assert_eq!(v, 3628800.0);
    }
}

#[test]
fn csv_export() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi_traj.csv");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let p = named("power-law", &[2.0], 0.5, 1.0, &[]).unwrap();
    let t = solve(p, 100, FodeStrategyKind::Serial, 1, 0).unwrap();
    unsafe {
        assert_eq!(fode_trajectory_write_csv(t, cpath.as_ptr()), FodeStatus::Ok);
        let bad = CString::new("/nonexistent/dir/x.csv").unwrap();
        assert_eq!(fode_trajectory_write_csv(t, bad.as_ptr()), FodeStatus::Io);
        fode_trajectory_free(t);
        fode_problem_free(p);
    }
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("t,y0\n"));
    assert_eq!(text.lines().count(), 102);
}

#[test]
fn status_names_and_version() {
    unsafe {
        assert_eq!(CStr::from_ptr(fode_status_name(FodeStatus::Ok)).to_str().unwrap(), "ok");
        assert_eq!(CStr::from_ptr(fode_status_name(FodeStatus::Step)).to_str().unwrap(), "non-finite value during a step");
        assert_eq!(CStr::from_ptr(fode_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
