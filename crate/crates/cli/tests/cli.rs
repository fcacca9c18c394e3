use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const KEY: &str = "00112233445566778899aabbccddeeff";
const OTHER: &str = "ffeeddccbbaa99887766554433221100";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_roisel"));
    c.env_remove("ROISEL_KEY");
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("spawn roisel")
}

fn ok(c: &mut Command) -> String {
    let o = run(c);
    assert!(
        o.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Work {
    dir: tempfile::TempDir,
}

impl Work {
    fn new(frames: usize) -> Self {
        let w = Work {
            dir: tempfile::tempdir().unwrap(),
        };
        ok(bin()
            .args(["synth", "--frames", &frames.to_string(), "--out"])
            .arg(w.p("src.yuv"))
            .arg("--roi-out")
            .arg(w.p("src.roi")));
        w
    }

    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn encode(&self, out: &str, extra: &[&str]) -> Command {
        let mut c = bin();
        c.args(["encode", "--width", "176", "--height", "144", "--input"])
            .arg(self.p("src.yuv"))
            .arg("--roi")
            .arg(self.p("src.roi"))
            .arg("--out")
            .arg(self.p(out))
            .args(extra);
        c
    }

    fn decode(&self, input: &str, out: &str, key: Option<&str>) -> Command {
        let mut c = bin();
        c.args(["decode", "--input"]).arg(self.p(input)).arg("--out").arg(self.p(out));
        if let Some(k) = key {
            c.args(["--key", k]);
        }
        c
    }

    fn evaluate(&self, plain: &str, enc: &str) -> Command {
        let mut c = bin();
        c.args(["evaluate", "--width", "176", "--height", "144", "--original"])
            .arg(self.p("src.yuv"))
            .arg("--plain")
            .arg(self.p(plain))
            .arg("--enc")
            .arg(self.p(enc))
            .arg("--roi")
            .arg(self.p("src.roi"));
        c
    }

    fn read(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.p(name)).unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn basic_level_round_trip_and_zero_bitrate() {
    let w = Work::new(4);
    ok(&mut w.encode("plain.rsel", &[]));
    ok(&mut w.encode("basic.rsel", &["--level", "basic", "--key", KEY, "--nonce", "9"]));
    let out = ok(w
        .evaluate("plain.rsel", "basic.rsel")
        .arg("--report-json")
        .arg(w.p("r.json"))
        .arg("--report-csv")
        .arg(w.p("r.csv")));
    assert!(out.contains("bitrate_change: 0.00%"), "{out}");
    let json = String::from_utf8(w.read("r.json")).unwrap();
    assert!(json.contains("\"bitrate_change_pct\""));
    let csv = String::from_utf8(w.read("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("frame,roi_units,iou,psnr_db"));

    ok(&mut w.decode("plain.rsel", "plain.yuv", None));
    ok(&mut w.decode("basic.rsel", "keyed.yuv", Some(KEY)));
    ok(&mut w.decode("basic.rsel", "keyless.yuv", None));
    assert_eq!(w.read("plain.yuv"), w.read("keyed.yuv"));
    assert_ne!(w.read("plain.yuv"), w.read("keyless.yuv"));
}

#[test]
fn identity_report_is_degenerate() {
    let w = Work::new(2);
    ok(&mut w.encode("plain.rsel", &[]));
    let out = ok(&mut w.evaluate("plain.rsel", "plain.rsel"));
    assert!(out.contains("psnr_db:        inf"), "{out}");
    assert!(out.contains("npcr:           0.0000%"), "{out}");
}

#[test]
fn key_flag_beats_environment_and_is_never_echoed() {
    let w = Work::new(2);
    ok(&mut w.encode("plain.rsel", &[]));
    let o = run(w
        .encode("enc.rsel", &["--level", "enhanced", "--key", KEY])
        .env("ROISEL_KEY", OTHER));
    assert!(o.status.success());
    for s in [&o.stdout, &o.stderr] {
        let s = String::from_utf8_lossy(s);
        assert!(!s.contains(KEY) && !s.contains(OTHER), "{s}");
    }
    ok(&mut w.decode("plain.rsel", "plain.yuv", None));
    ok(w.decode("enc.rsel", "env.yuv", None).env("ROISEL_KEY", KEY));
    assert_eq!(w.read("plain.yuv"), w.read("env.yuv"));
}

#[test]
fn roi_file_without_a_frame_leaves_it_clear() {
    let w = Work::new(3);
    std::fs::write(w.p("src.roi"), "0:[0,(52,40,100,88)]\n").unwrap();
    ok(&mut w.encode("plain.rsel", &[]));
    ok(&mut w.encode("enc.rsel", &["--level", "advanced", "--key", KEY]));
    ok(&mut w.decode("plain.rsel", "plain.yuv", None));
    ok(&mut w.decode("enc.rsel", "keyless.yuv", None));
    let (a, b) = (w.read("plain.yuv"), w.read("keyless.yuv"));
    let frame = 176 * 144 * 3 / 2;
    assert_ne!(a[..frame], b[..frame]);
    // Later frames reference frame 0 only outside its ROI tiles.
    assert_eq!(a[frame..], b[frame..]);
}

#[test]
fn usage_errors_exit_with_two() {
    let w = Work::new(1);
    ok(&mut w.encode("enc.rsel", &["--level", "basic", "--key", KEY]));
    let o = run(&mut w.decode("enc.rsel", "x.yuv", Some("0011")));
    assert_eq!(code(&o), 2);
    let o = run(&mut w.encode("x.rsel", &["--level", "basic"]));
    assert_eq!(code(&o), 2);
    let o = run(&mut w.encode("x.rsel", &["--qp", "60"]));
    assert_eq!(code(&o), 2);
    let o = run(w.evaluate("enc.rsel", "enc.rsel").arg("--roi").arg(w.p("missing.roi")));
    assert_eq!(code(&o), 2);
    let o = run(bin().args(["encode", "--bogus"]));
    assert_eq!(code(&o), 2);
}

#[test]
fn runtime_errors_exit_with_one() {
    let w = Work::new(1);
    std::fs::write(w.p("junk.rsel"), b"not a container").unwrap();
    let o = run(&mut w.decode("junk.rsel", "x.yuv", None));
    assert_eq!(code(&o), 1);
    let o = run(bin()
        .args(["decode", "--out", "x.yuv", "--input"])
        .arg(Path::new("/nonexistent/in.rsel")));
    assert_eq!(code(&o), 1);
}

#[test]
fn selftest_passes_and_names_injected_faults() {
    let out = ok(bin().arg("selftest"));
    assert!(out.contains("all oracles passed"), "{out}");
    let o = run(bin().args(["selftest", "--inject-fault", "enc_merge_idx"]));
    assert_eq!(code(&o), 1);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("FAILED: element_ciphers"), "{out}");
    assert!(out.contains("enc_merge_idx"), "{out}");
    assert!(out.contains("merge_idx v="), "{out}");
}
