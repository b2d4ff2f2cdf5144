use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn effcap(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_effcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(rows: &[Vec<String>], idx: usize) -> Vec<f64> {
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn wideband_table_reproduces_published_values() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("table.csv");
    let o = effcap(&["wideband-table", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["theta", "alpha_star", "xi", "ebn0_min_db", "s0"]);
    let eb = column(&rows, 3);
    for (got, want) in eb.iter().zip([4.6776, 4.7029, 4.9177, 6.3828, 10.8333]) {
        assert!((got - want).abs() <= 0.001, "{got} vs {want}");
    }
}

#[test]
fn low_power_sweep_is_u_shaped_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("lp.toml");
    fs::write(
        &cfg,
        "theta_list = [0.01]\nsweep.snr.start = 1e-6\nsweep.snr.stop = 1.0\nsweep.snr.points = 31\n",
    )
    .unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = effcap(&["ebn0-lowpower", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    assert!(!bytes.contains(&b'\r'));

    let (header, rows) = read_csv(&a);
    assert_eq!(header, ["snr", "theta", "rho_opt", "r_opt", "re_bits_s_hz", "ebn0_db"]);
    let snr = column(&rows, 0);
    assert!(snr.windows(2).all(|w| w[1] > w[0]));
    let db = column(&rows, 5);
    let imin = db
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .unwrap()
        .0;
    assert!(imin > 0 && imin < db.len() - 1);
    assert!(db[..=imin].windows(2).all(|w| w[1] < w[0]));
    assert!(db[imin..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn csv_values_round_trip_exactly() {
    use effcap_cli::config::parse_config;
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rho.csv");
    let o = effcap(&["optimal-rho", "--set", "sweep.snr.points=9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let (_, rows) = read_csv(&out);
    let cfg = parse_config("mode = \"optimal-rho\"\nsweep.snr.points = 9").unwrap();
    let table = effcap_cli::compute(&cfg).unwrap();
    assert_eq!(rows.len(), 9);
    for (row, expected) in rows.iter().zip(&table.rows) {
        for (cell, want) in row.iter().zip(expected) {
            let (x, y): (f64, f64) = (cell.parse().unwrap(), want.parse().unwrap());
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}

#[test]
fn wideband_sweep_converges_to_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("wb.csv");
    let o = effcap(&[
        "ebn0-wideband",
        "--set",
        "theta_list=[0.01]",
        "--set",
        "sweep.bandwidth.start=1e4",
        "--set",
        "sweep.bandwidth.stop=1e8",
        "--set",
        "sweep.bandwidth.points=9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["bandwidth", "theta", "re_bits_s_hz", "ebn0_db"]);
    let db = column(&rows, 3);
    assert!(db.windows(2).all(|w| w[1] < w[0]));
    assert!((db[db.len() - 1] - 4.9177).abs() < 0.05);
}

#[test]
fn queue_validation_writes_one_row_per_replication() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q.csv");
    let o = effcap(&[
        "validate-queue",
        "--set",
        "frames=1000000",
        "--set",
        "replications=2",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 2);
    let at = |name: &str| header.iter().position(|h| h == name).unwrap();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[at("seed")], "5");
        assert_eq!(row[at("stream")], i.to_string());
        let theta_hat: f64 = row[at("theta_hat")].parse().unwrap();
        assert!(theta_hat > 0.0);
        let levels = row[at("q_levels")].split(';').count();
        assert_eq!(levels, row[at("counts")].split(';').count());
    }
}

#[test]
fn exit_codes_and_no_partial_output() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    let out_s = out.to_str().unwrap();

    let o = effcap(&["ebn0-lowpower", "--set", "bandwith=1", "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bandwith"));

    let o = effcap(&["fig9", "--out", out_s]);
    assert_eq!(o.status.code(), Some(1));

    let o = effcap(&["wideband-table"]);
    assert_eq!(o.status.code(), Some(1));

    // a nearly idle queue has no tail to fit
    let o = effcap(&[
        "validate-queue",
        "--set",
        "frames=200000",
        "--set",
        "replications=1",
        "--set",
        "safety=1e-9",
        "--out",
        out_s,
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let missing = dir.path().join("no/such/dir/x.csv");
    let o = effcap(&["wideband-table", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = effcap(&["wideband-table", "--config", dir.path().join("absent.toml").to_str().unwrap(), "--out", out_s]);
    assert_eq!(o.status.code(), Some(3));

    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}
