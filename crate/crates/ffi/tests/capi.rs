use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use ocus_ffi::*;

const EXAMPLE1: &str = r#"{
    "atoms": ["x1", "x2", "x3"],
    "clauses": [
        {"lits": [-1, -2, 3], "group": "agnostic"},
        {"lits": [-1, 2, 3], "group": "agnostic"},
        {"lits": [1], "group": "specific"},
        {"lits": [-2, -3], "group": "specific"}
    ],
    "initial": [1]
}"#;

fn last_error() -> String {
    let p = ocus_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn example_formula() -> *mut OcusFormula {
    let f = ocus_formula_new(3);
    let rows: [(&[i32], u64); 7] =
        [(&[-1, -2, 3], 60), (&[-1, 2, 3], 60), (&[1], 100), (&[-2, -3], 100), (&[1], 1), (&[2], 1), (&[-3], 1)];
    for (lits, w) in rows {
        assert_eq!(unsafe { ocus_formula_add_clause(f, lits.as_ptr(), lits.len(), w) }, OcusStatus::Ok);
    }
    f
}

#[test]
fn formula_solve_matches_running_example() {
    let f = example_formula();
    let domain = [5usize, 6];
    let grow = CString::new("max:actual:unif").unwrap();
    let mut buf = [0usize; 8];
    let (mut len, mut cost) = (0usize, 0u64);
    let s = unsafe {
        ocus_formula_solve(f, domain.as_ptr(), 2, grow.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut len, &mut cost)
    };
    assert_eq!(s, OcusStatus::Ok);
    assert_eq!(&buf[..len], &[0, 1, 4, 6]);
    assert_eq!(cost, 122);

    let mut small = [0usize; 2];
    let s =
        unsafe { ocus_formula_solve(f, domain.as_ptr(), 2, grow.as_ptr(), small.as_mut_ptr(), 2, &mut len, &mut cost) };
    assert_eq!(s, OcusStatus::BufferTooSmall);
    assert_eq!(len, 4);
    unsafe { ocus_formula_free(f) };
}

#[test]
fn satisfiable_formula_has_no_subset() {
    let f = ocus_formula_new(2);
    unsafe {
        assert_eq!(ocus_formula_add_clause(f, [1, 2].as_ptr(), 2, 1), OcusStatus::Ok);
        assert_eq!(ocus_formula_len(f), 1);
        let grow = CString::new("none").unwrap();
        let (mut len, mut cost) = (0usize, 0u64);
        let s = ocus_formula_solve(f, ptr::null(), 0, grow.as_ptr(), ptr::null_mut(), 0, &mut len, &mut cost);
        assert_eq!(s, OcusStatus::NoneExists);
        ocus_formula_free(f);
    }
}

#[test]
fn bad_arguments_report_errors() {
    let f = ocus_formula_new(2);
    unsafe {
        assert_eq!(ocus_formula_add_clause(f, [3].as_ptr(), 1, 1), OcusStatus::InvalidArgument);
        assert!(last_error().contains("exceeds"));
        assert_eq!(ocus_formula_add_clause(f, [1, -1].as_ptr(), 2, 1), OcusStatus::InvalidArgument);
        assert_eq!(ocus_formula_add_clause(f, [1].as_ptr(), 1, 0), OcusStatus::InvalidArgument);
        assert_eq!(ocus_formula_add_clause(ptr::null_mut(), [1].as_ptr(), 1, 1), OcusStatus::NullPointer);
        let grow = CString::new("sideways").unwrap();
        let (mut len, mut cost) = (0usize, 0u64);
        let s = ocus_formula_solve(f, ptr::null(), 0, grow.as_ptr(), ptr::null_mut(), 0, &mut len, &mut cost);
        assert_eq!(s, OcusStatus::Parse);
        ocus_formula_free(f);
        ocus_formula_free(ptr::null_mut());
    }
}

#[test]
fn problem_explain_and_verify() {
    let json = CString::new(EXAMPLE1).unwrap();
    let mut problem = ptr::null_mut();
    unsafe {
        assert_eq!(ocus_problem_from_json(json.as_ptr(), &mut problem), OcusStatus::Ok);
        assert_eq!(ocus_problem_atom_count(problem), 3);
        assert_eq!(ocus_problem_remaining(problem), 2);
        let config = CString::new("ocus+shared@max:actual:unif").unwrap();
        let mut seq = ptr::null_mut();
        assert_eq!(ocus_problem_explain(problem, config.as_ptr(), 0, &mut seq), OcusStatus::Ok);
        assert!(ocus_sequence_len(seq) >= 1);
        let mut total = 0;
        for i in 0..ocus_sequence_len(seq) {
            let mut c = 0;
            assert_eq!(ocus_sequence_step_cost(seq, i, &mut c), OcusStatus::Ok);
            total += c;
        }
        assert_eq!(total, ocus_sequence_total_cost(seq));
        let mut c = 0;
        assert_eq!(ocus_sequence_step_cost(seq, 99, &mut c), OcusStatus::InvalidArgument);
        assert_eq!(ocus_sequence_verify(problem, seq), OcusStatus::Ok);
        let doc = ocus_sequence_to_json(seq);
        let text = CStr::from_ptr(doc).to_str().unwrap().to_owned();
        ocus_string_free(doc);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["total_cost"].as_u64(), Some(total));
        assert_eq!(v["config"], "ocus+shared@max:actual:unif");
        ocus_sequence_free(seq);
        ocus_problem_free(problem);
    }
}

#[test]
fn invalid_inputs_leave_null_handles() {
    unsafe {
        let mut problem = ptr::null_mut();
        let junk = CString::new("{not json").unwrap();
        assert_eq!(ocus_problem_from_json(junk.as_ptr(), &mut problem), OcusStatus::Parse);
        assert!(problem.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(ocus_problem_from_json(ptr::null(), &mut problem), OcusStatus::NullPointer);

        let json = CString::new(EXAMPLE1).unwrap();
        assert_eq!(ocus_problem_from_json(json.as_ptr(), &mut problem), OcusStatus::Ok);
        let mut seq = ptr::null_mut();
        let bad = CString::new("ocus+perlit@none").unwrap();
        assert_eq!(ocus_problem_explain(problem, bad.as_ptr(), 0, &mut seq), OcusStatus::InvalidArgument);
        assert!(seq.is_null());
        assert!(last_error().contains("invalid configuration"));
        assert!(ocus_sequence_to_json(ptr::null()).is_null());
        assert_eq!(ocus_sequence_len(ptr::null()), 0);
        ocus_problem_free(problem);
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ocus.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "typedef struct OcusProblem OcusProblem;",
        "typedef struct OcusSequence OcusSequence;",
        "typedef struct OcusFormula OcusFormula;",
        "OCUS_STATUS_OK = 0",
        "ocus_last_error(void)",
        "ocus_problem_explain(",
        "ocus_formula_solve(",
        "ocus_string_free(",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
    // A C compiler must accept it, when one is around.
    if Command::new("cc").arg("--version").output().is_ok() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("use.c");
        std::fs::write(
            &src,
            "#include \"ocus.h\"\nint main(void) { OcusFormula *f = ocus_formula_new(1); ocus_formula_free(f); return OCUS_STATUS_OK; }\n",
        )
        .unwrap();
        let out = Command::new("cc")
            .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
            .arg(header.parent().unwrap())
            .arg(&src)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
