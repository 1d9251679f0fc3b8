use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use kfbi_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        kfbi_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn preset_solve_roundtrip() {
    let name = CString::new("ex2-helicoid").unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(
            kfbi_experiment_from_preset(name.as_ptr(), &mut exp),
            KfbiStatus::Ok
        );
        let mut sol = ptr::null_mut();
        assert_eq!(kfbi_experiment_solve(exp, 64, &mut sol), KfbiStatus::Ok);
        let (mut nx, mut ny) = (0, 0);
        assert_eq!(kfbi_solution_shape(sol, &mut nx, &mut ny), KfbiStatus::Ok);
        assert_eq!((nx, ny), (65, 65));
        let mut u = vec![0.0; nx * ny];
        let mut ex = vec![0.0; nx * ny];
        assert_eq!(
            kfbi_solution_values(sol, u.as_mut_ptr(), u.len()),
            KfbiStatus::Ok
        );
        assert_eq!(
            kfbi_solution_exact(sol, ex.as_mut_ptr(), ex.len()),
            KfbiStatus::Ok
        );
        let err = kfbi_solution_max_error(sol);
        assert!(err > 0.0 && err < 1e-3, "{err}");
        // interior nodes carry the reported error; the max over them matches
        let mut worst: f64 = 0.0;
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                worst = worst.max((u[j * nx + i] - ex[j * nx + i]).abs());
            }
        }
        assert!((worst - err).abs() <= 1e-15, "{worst} vs {err}");
        assert!(kfbi_solution_interface_points(sol) > 8);
        assert!(kfbi_solution_gmres_iterations(sol) >= 1);
        assert!(kfbi_solution_cpu_seconds(sol) >= 0.0);
        kfbi_solution_free(sol);
        kfbi_experiment_free(exp);
    }
}

#[test]
fn toml_config_and_error_codes() {
    let good = CString::new(
        r#"
name = "plane"
problem = "dirichlet_bvp"
kappa_plus = 1.0
exact = "exp_cos"
grids = [32]
[surface]
kind = "plane"
half_width = 1.0
[curve]
kind = "circle"
radius = 0.5
"#,
    )
    .unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(
            kfbi_experiment_from_toml(good.as_ptr(), &mut exp),
            KfbiStatus::Ok
        );
        let mut sol = ptr::null_mut();
        // not a power of two
        assert_eq!(kfbi_experiment_solve(exp, 48, &mut sol), KfbiStatus::Config);
        assert!(last_error().starts_with("config"));
        assert!(sol.is_null());
        kfbi_experiment_free(exp);

        let bad = CString::new("name = 3").unwrap();
        let mut exp = ptr::null_mut();
        assert_eq!(
            kfbi_experiment_from_toml(bad.as_ptr(), &mut exp),
            KfbiStatus::Config
        );
        assert!(exp.is_null());

        let missing = CString::new("no-such-preset").unwrap();
        assert_eq!(
            kfbi_experiment_from_preset(missing.as_ptr(), &mut exp),
            KfbiStatus::Config
        );
        assert!(last_error().contains("no-such-preset"));

        assert_eq!(
            kfbi_experiment_from_toml(ptr::null(), &mut exp),
            KfbiStatus::NullPointer
        );
        assert_eq!(
            kfbi_experiment_solve(ptr::null(), 64, &mut ptr::null_mut()),
            KfbiStatus::NullPointer
        );
        assert!(kfbi_solution_max_error(ptr::null()).is_nan());
        kfbi_experiment_free(ptr::null_mut());
        kfbi_solution_free(ptr::null_mut());
    }
}

#[test]
fn geometry_errors_map_to_their_code() {
    let text = CString::new(
        r#"
name = "too-wide"
problem = "dirichlet_bvp"
kappa_plus = 1.0
exact = "exp_cos"
grids = [32]
[surface]
kind = "plane"
half_width = 1.0
[curve]
kind = "circle"
radius = 0.99
"#,
    )
    .unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        assert_eq!(
            kfbi_experiment_from_toml(text.as_ptr(), &mut exp),
            KfbiStatus::Ok
        );
        let mut sol = ptr::null_mut();
        assert_eq!(
            kfbi_experiment_solve(exp, 32, &mut sol),
            KfbiStatus::Geometry
        );
        assert!(
            last_error().starts_with("interface_too_close"),
            "{}",
            last_error()
        );
        kfbi_experiment_free(exp);
    }
}

#[test]
fn short_buffers_are_rejected() {
    let name = CString::new("ex2-helicoid").unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        kfbi_experiment_from_preset(name.as_ptr(), &mut exp);
        let mut sol = ptr::null_mut();
        assert_eq!(kfbi_experiment_solve(exp, 32, &mut sol), KfbiStatus::Ok);
        let mut small = vec![0.0; 10];
        assert_eq!(
            kfbi_solution_values(sol, small.as_mut_ptr(), small.len()),
            KfbiStatus::BufferTooSmall
        );
        assert_eq!(
            kfbi_solution_values(sol, ptr::null_mut(), 0),
            KfbiStatus::NullPointer
        );
        kfbi_solution_free(sol);
        kfbi_experiment_free(exp);
    }
}

#[test]
fn error_message_truncates_and_reports_length() {
    let missing = CString::new("x".repeat(40)).unwrap();
    let mut exp = ptr::null_mut();
    unsafe {
        kfbi_experiment_from_preset(missing.as_ptr(), &mut exp);
        let full = kfbi_last_error_message(ptr::null_mut(), 0);
        let mut buf = [0 as std::ffi::c_char; 8];
        assert_eq!(kfbi_last_error_message(buf.as_mut_ptr(), buf.len()), full);
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_bytes().len(), 7);
    }
}

#[test]
fn status_names() {
    let name = |s| unsafe {
        CStr::from_ptr(kfbi_status_name(s))
            .to_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(name(KfbiStatus::Ok), "ok");
    assert_eq!(name(KfbiStatus::NotConverged), "not_converged");
    assert_eq!(name(KfbiStatus::BufferTooSmall), "buffer_too_small");
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kfbi.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "kfbi_experiment_from_toml",
        "kfbi_experiment_solve",
        "kfbi_last_error_message",
        "KFBI_STATUS_OK",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"kfbi.h\"\nint main(void) { KfbiExperiment *e = 0; return kfbi_experiment_from_preset(\"ex1\", &e) == KFBI_STATUS_OK; }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
