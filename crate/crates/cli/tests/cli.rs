use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nladpcm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nladpcm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn corpus(dir: &Path, kind: &str, count: usize, len: usize) -> Vec<PathBuf> {
    let o = nladpcm(
        &[
            "gen-corpus",
            "c",
            "--kind",
            kind,
            "--count",
            &count.to_string(),
            "--len",
            &len.to_string(),
        ],
        dir,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).lines().map(|l| dir.join(l)).collect()
}

#[test]
fn eval_identical_files_hits_ceiling() {
    let tmp = tempfile::tempdir().unwrap();
    let files = corpus(tmp.path(), "sines", 1, 2000);
    let f = files[0].to_str().unwrap();
    let o = nladpcm(&["eval", f, f], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(value(&out, "segsnr_db"), 80.0);
    assert_eq!(value(&out, "std_db"), 0.0);
}

#[test]
fn missing_input_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nladpcm(&["eval", "absent.wav", "absent.wav"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.wav"));

    let o = nladpcm(&["decode", "absent.nadp", "out.wav"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.nadp"));
}

#[test]
fn bad_configuration_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let files = corpus(tmp.path(), "ar", 1, 1000);
    let f = files[0].to_str().unwrap();
    let o = nladpcm(&["encode", f, "s.nadp", "--bits", "7"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let o = nladpcm(&["encode", f, "s.nadp", "--set", "bogus=1"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn garbage_stream_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("junk.nadp"), b"not a stream").unwrap();
    let o = nladpcm(&["decode", "junk.nadp", "out.wav"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encode_decode_eval_matches_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let files = corpus(tmp.path(), "speechlike", 1, 3000);
    let f = files[0].to_str().unwrap();
    for method in ["ADPCMB-LPC10", "ADPCMF-MLP", "ADPCMB-HYBRID"] {
        let o = nladpcm(
            &[
                "encode", f, "s.nadp", "--method", method, "--bits", "3", "--seed", "4",
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = nladpcm(&["decode", "s.nadp", "d.wav"], tmp.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let o = nladpcm(&["eval", f, "d.wav"], tmp.path());
        let eval_db = value(&stdout(&o), "segsnr_db");

        let o = nladpcm(
            &[
                "sweep",
                f,
                "--methods",
                method,
                "--bits",
                "3",
                "--seeds",
                "4",
                "-o",
                "r.csv",
            ],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read_to_string(tmp.path().join("r.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let header: Vec<&str> = lines[0].split(',').collect();
        let row: Vec<&str> = lines[1].split(',').collect();
        let col = header.iter().position(|h| *h == "segsnr_db").unwrap();
        let sweep_db: f64 = row[col].parse().unwrap();
        assert!(
            (sweep_db - eval_db).abs() < 1e-6,
            "{method}: {sweep_db} vs {eval_db}"
        );
    }
}

#[test]
fn sweep_reads_config_file_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    let files = corpus(tmp.path(), "ar", 2, 1500);
    let list: Vec<&str> = files.iter().map(|p| p.to_str().unwrap()).collect();
    std::fs::write(
        tmp.path().join("sweep.cfg"),
        format!(
            "corpus = {}\nmethods = ADPCMB-LPC10, ADPCMF-LPC10\nbits = 2 3\n",
            list.join(" ")
        ),
    )
    .unwrap();
    let o = nladpcm(&["sweep", "--config", "sweep.cfg"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 5);

    let o = nladpcm(
        &["sweep", "--config", "sweep.cfg", "--bits", "5"],
        tmp.path(),
    );
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(5) == Some("5")));
    assert!(out
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(11) == Some("2")));
}
