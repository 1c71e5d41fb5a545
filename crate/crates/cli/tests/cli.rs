//! End-to-end checks of the `ccfq` binary: exit-code contract, command
//! output, and the document round-trip and report-arithmetic invariants.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ccfq::document::{parse_document, serialize_model, Strictness};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn ccfq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccfq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn derive_lists_case_study_groups() {
    let out = ccfq(&["derive", fixture("rts_case_study.ccf").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("39 CCCG(s) derived from coupling attributes"));
    assert!(text.contains(
        "BP-ALL: members=BP-A1,BP-A2,BP-B1,BP-B2,BP-C1,BP-C2,BP-D1,BP-D2 \
         shared=function=bistable-trip,hardware=plc-bp,manufacturer=vendor-x,software=bp-app"
    ));
    assert!(text.contains("BP-DIVISION-A: members=BP-A1,BP-A2 shared=division=A"));
    assert_eq!(text.lines().filter(|l| l.starts_with("BP-")).count(), 5);
}

#[test]
fn derive_marks_user_specified_groups() {
    let out = ccfq(&["derive", fixture("partial_coupling.ccf").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(user-specified)"));
    assert!(text.contains("ABC: members=A,B,C"));
}

#[test]
fn exit_codes_follow_the_contract() {
    // 2: unreadable file.
    let out = ccfq(&["derive", "/nonexistent.ccf"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // 2: syntax error.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ccf");
    std::fs::write(&bad, "[component A\nclass = X\n").unwrap();
    let out = ccfq(&["derive", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // 2: unknown key under strict parsing, 0 with --lenient.
    let unknown = dir.path().join("unknown.ccf");
    std::fs::write(
        &unknown,
        "[component A]\nclass = X\nhardware.q = 0.1\nbogus = 1\n",
    )
    .unwrap();
    let out = ccfq(&["derive", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = ccfq(&["--lenient", "derive", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("bogus"));

    // 3: empty component list.
    let empty = dir.path().join("empty.ccf");
    std::fs::write(&empty, "[options]\nnormalize = proportional\n").unwrap();
    let out = ccfq(&["derive", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // 3: validation failure (nonidentical totals within a group).
    let nonidentical = dir.path().join("nonidentical.ccf");
    std::fs::write(
        &nonidentical,
        "[component A]\nclass = X\nhardware.q = 1e-4\n\
         [component B]\nclass = X\nhardware.q = 2e-4\n\
         [cccg G]\nmembers = A, B\nhardware.beta = 0.1\n",
    )
    .unwrap();
    let out = ccfq(&["solve", nonidentical.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("NONIDENTICAL_QT"));

    // 3: tree referencing an unknown component.
    let ghost = dir.path().join("ghost.ccf");
    std::fs::write(
        &ghost,
        "[component A]\nclass = X\nhardware.q = 1e-4\n\
         [component B]\nclass = X\nhardware.q = 1e-4\n\
         [cccg G]\nmembers = A, B\nhardware.beta = 0.1\n\
         [tree]\ntop = and(A, GHOST)\n",
    )
    .unwrap();
    let out = ccfq(&["tree", ghost.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // 3: tree command on a model without a tree.
    let out = ccfq(&["tree", fixture("rts_case_study.ccf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // 4: numeric failure (independent-given with beta_t = 1).
    let degenerate = dir.path().join("degenerate.ccf");
    std::fs::write(
        &degenerate,
        "[component A]\nclass = X\nhardware.q = 1e-4\nhardware.mode = independent\n\
         [component B]\nclass = X\nhardware.q = 1e-4\nhardware.mode = independent\n\
         [cccg G]\nmembers = A, B\nhardware.beta = 1.0\n",
    )
    .unwrap();
    let out = ccfq(&["solve", degenerate.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn beta_command_prints_case_study_values() {
    let out = ccfq(&["beta", fixture("rts_case_study.ccf").to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("2317/51000"));
    assert!(text.contains("42918/100000"));
    assert!(text.contains("0.045"));
    assert!(text.contains("0.429"));
    assert!(text.contains("normalization: not triggered"));
}

#[test]
fn beta_command_names_blank_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blank.ccf");
    std::fs::write(
        &path,
        "[component A]\nclass = X\nhardware.q = 1e-4\n\
         [component B]\nclass = X\nhardware.q = 1e-4\n\
         [cccg G]\nmembers = A, B\nhardware.grades = A+, E, A, D, C, E, D, C\n",
    )
    .unwrap();
    // Redundancy has an A+ cell; Separation does not.
    let out = ccfq(&["beta", path.to_str().unwrap()]);
    assert!(out.status.success());

    std::fs::write(
        &path,
        "[component A]\nclass = X\nhardware.q = 1e-4\n\
         [component B]\nclass = X\nhardware.q = 1e-4\n\
         [cccg G]\nmembers = A, B\nhardware.grades = A, A+, A, D, C, E, D, C\n",
    )
    .unwrap();
    let out = ccfq(&["beta", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("MISSING_CELL"), "{err}");
    assert!(err.contains("Separation") || err.contains("A+"), "{err}");
}

#[test]
fn solve_text_and_csv_agree_at_display_precision() {
    let model_path = fixture("rts_case_study.ccf");
    let text_out = ccfq(&["solve", model_path.to_str().unwrap()]);
    assert!(text_out.status.success());
    let csv_out = ccfq(&["solve", model_path.to_str().unwrap(), "--format", "csv"]);
    assert!(csv_out.status.success());

    let csv = stdout(&csv_out);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["component", "domain", "INDIVIDUAL", "RACK", "DIVISION", "ALL", "Total", "flags"]);

    // Report arithmetic: the printed Total equals the printed row sum at
    // display precision (4 significant digits -> 1e-3 relative slack).
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| -> Option<f64> {
            if s == "N/A" { None } else { Some(s.parse().unwrap()) }
        };
        let individual = parse(fields[2]).unwrap();
        let cells: f64 = fields[3..6].iter().filter_map(|s| parse(s)).sum();
        let total = parse(fields[6]).unwrap();
        assert!(
            ((individual + cells) - total).abs() <= 1.5e-3 * total,
            "row {line} does not sum"
        );
        rows += 1;
    }
    assert_eq!(rows, 84);
}

#[test]
fn solve_flags_normalized_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("over.ccf");
    std::fs::write(
        &path,
        "[component A]\nclass = X\nattr.site = s\nhardware.q = 1e-4\n\
         [component B]\nclass = X\nattr.site = s\nhardware.q = 1e-4\n\
         [cccg G1]\nmembers = A, B\nshared.site = s\nhardware.beta = 0.7\n\
         [cccg G2]\nmembers = A, B\nhardware.beta = 0.6\n",
    )
    .unwrap();
    let out = ccfq(&["solve", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("NORMALIZED"), "{text}");

    // User-weight normalization via the flag.
    let weights = dir.path().join("weights.txt");
    std::fs::write(&weights, "G1 = 0.5\nG2 = 0.5\n").unwrap();
    let arg = format!("weights:{}", weights.display());
    let out = ccfq(&["solve", path.to_str().unwrap(), "--normalize", &arg]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("NORMALIZED"));
}

#[test]
fn tree_modes_on_demo_models() {
    let two = fixture("two_of_three.ccf");
    let out = ccfq(&["tree", two.to_str().unwrap(), "--mode", "exact"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("system exact 7.660E-02"));

    let fig = fixture("partial_coupling.ccf");
    let out = ccfq(&["tree", fig.to_str().unwrap(), "--mode", "rare"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("system rare-event 1.100E-01"));

    let dir = tempfile::tempdir().unwrap();
    let cuts = dir.path().join("cuts.txt");
    let out = ccfq(&["tree", fig.to_str().unwrap(), "--mode", "rare", "--cutsets", cuts.to_str().unwrap()]);
    assert!(out.status.success());
    let exported = std::fs::read_to_string(&cuts).unwrap();
    let lines: Vec<&str> = exported.lines().collect();
    assert_eq!(
        lines,
        [
            "CCF:AB:hw",
            "CCF:ABC:hw",
            "CCF:AC:hw",
            "CCF:BC:hw",
            "I:A:hw,I:B:hw",
            "I:A:hw,I:C:hw",
            "I:B:hw,I:C:hw",
        ]
    );

    let out = ccfq(&["tree", two.to_str().unwrap(), "--mode", "mc", "--seed", "7", "--reps", "50000"]);
    assert!(out.status.success());
    let record = stdout(&out);
    let fields: Vec<&str> = record.split_whitespace().collect();
    assert_eq!(fields.len(), 7);
    assert_eq!(fields[0], "system");
    assert_eq!(fields[5], "50000");
    assert_eq!(fields[6], "7");
    // Identical invocation reproduces the record bit for bit.
    let again = ccfq(&["tree", two.to_str().unwrap(), "--mode", "mc", "--seed", "7", "--reps", "50000"]);
    assert_eq!(record, stdout(&again));
}

#[test]
fn exact_mode_suggests_mc_when_too_large() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.ccf");
    let mut text = String::new();
    for i in 0..30 {
        text.push_str(&format!(
            "[component C{i}]\nclass = X\nattr.site = s\nhardware.q = 1e-3\n"
        ));
    }
    text.push_str("[betas X ALL]\nhardware.beta = 0.1\n[tree]\ntop = or(");
    text.push_str(&(0..30).map(|i| format!("C{i}")).collect::<Vec<_>>().join(", "));
    text.push_str(")\n");
    std::fs::write(&path, text).unwrap();
    let out = ccfq(&["tree", path.to_str().unwrap(), "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("--mode mc"));
}

#[test]
fn diff_flags_beta_shift_and_loose_mode() {
    let a = fixture("rts_case_study.ccf");
    let b = fixture("rts_case_study_diverse.ccf");
    let out = ccfq(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let beta_line = text
        .lines()
        .find(|l| l.starts_with("BP-ALL") && l.contains("software"))
        .unwrap();
    assert!(beta_line.contains('*'), "{beta_line}");
    assert!(beta_line.contains("0.429180"));
    assert!(beta_line.contains("0.189660"));

    // Identical inputs: nothing flagged.
    let out = ccfq(&["diff", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(!stdout(&out).contains('*'));

    // Differing component sets: exit 3, unless --loose.
    let dir = tempfile::tempdir().unwrap();
    let smaller = dir.path().join("smaller.ccf");
    let mut text = std::fs::read_to_string(&a).unwrap();
    let start = text.find("[component RTB-D]").unwrap();
    let end = text[start..].find("\n\n").map(|e| start + e + 2).unwrap();
    text.replace_range(start..end, "");
    std::fs::write(&smaller, text).unwrap();
    let out = ccfq(&["diff", a.to_str().unwrap(), smaller.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = ccfq(&["diff", a.to_str().unwrap(), smaller.to_str().unwrap(), "--loose"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("warning"));
}

#[test]
fn tables_dump_matches_published_counts() {
    let out = ccfq(&["tables"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let redundancy = text
        .lines()
        .find(|l| l.starts_with("Redundancy"))
        .unwrap();
    let counts: Vec<&str> = redundancy.split_whitespace().skip(3).collect();
    assert_eq!(counts, ["1800", "882", "433", "212", "104", "25", "6"]);
    assert!(text.contains("d = 51000"));
    assert!(text.contains("d = 100000"));
    assert!(text.contains("0 < R <= 0.5"));
    assert!(text.contains("deviates from the printed guide header"));
}

#[test]
fn document_round_trip_preserves_models() {
    for name in ["rts_case_study.ccf", "two_of_three.ccf", "partial_coupling.ccf"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let model = parse_document(&text, Strictness::Strict).unwrap().model;
        let serialized = serialize_model(&model);
        let reparsed = parse_document(&serialized, Strictness::Strict).unwrap().model;
        assert_eq!(model, reparsed, "round trip changed {name}");
    }
}
