use p2d_ident::estimation::{fit, multistart_fit, perturb, synth_data, Bounds, FitOptions};
use p2d_ident::identifiability::{fisher_information, rank_analysis, sensitivity_matrix, DiffScheme};
use p2d_ident::impedance::{log_grid, ImpedanceSpectrum};
use p2d_ident::io::{
    read_full_parameters, read_grouped_parameters, read_json, read_spectrum, read_spectrum_from, write_json,
    write_spectrum, write_spectrum_to, GridSpec,
};
use p2d_ident::params::{group_parameters, FullCellParameters, GroupedParameters};
use p2d_ident::Error;
use proptest::prelude::*;

fn nominal() -> GroupedParameters {
    group_parameters(&FullCellParameters::reference()).unwrap()
}

#[test]
fn parameter_files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let full = FullCellParameters::reference();
    let path = dir.path().join("full.json");
    write_json(&path, &full).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"schema_version\": \"1\""));
    assert_eq!(read_full_parameters(&path).unwrap(), full);

    let gpath = dir.path().join("grouped.json");
    write_json(&gpath, &nominal()).unwrap();
    assert_eq!(read_grouped_parameters(&gpath).unwrap(), nominal());
}

#[test]
fn invalid_record_on_disk_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut full = FullCellParameters::reference();
    full.t_plus = 1.2;
    let path = dir.path().join("bad.json");
    write_json(&path, &full).unwrap();
    let err = read_full_parameters(&path).unwrap_err();
    assert!(matches!(err, Error::InvalidParameters(_)));
    assert!(err.to_string().contains("t_plus"));
}

#[test]
fn spectrum_file_round_trip_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let grid: GridSpec = "1e-4,1e5,60".parse().unwrap();
    let data = synth_data(&nominal(), &grid.frequencies().unwrap(), 0.01, 9).unwrap();
    let path = dir.path().join("s.csv");
    write_spectrum(&path, &data).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("freq_hz,re_ohm,im_ohm"));
    assert_eq!(text.lines().count(), 61);
    assert_eq!(read_spectrum(&path).unwrap(), data);
}

#[test]
fn fit_ignores_row_order_of_the_file() {
    let freqs = log_grid(1e-4, 1e5, 60).unwrap();
    let data = synth_data(&nominal(), &freqs, 0.01, 4).unwrap();
    let mut buf = Vec::new();
    write_spectrum_to(&mut buf, &data).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    lines.rotate_left(17);
    let shuffled = format!("{header}\n{}\n", lines.join("\n"));
    let reread = read_spectrum_from(shuffled.as_bytes()).unwrap();
    let start = perturb(&nominal(), 0.1, 2);
    let opts = FitOptions {
        max_iter: 20,
        ..Default::default()
    };
    let a = fit(&data, &start, &opts).unwrap();
    let b = fit(&reread, &start, &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn fit_result_document_echoes_options() {
    let freqs = log_grid(1e-4, 1e5, 30).unwrap();
    let data = synth_data(&nominal(), &freqs, 0.0, 1).unwrap();
    let opts = FitOptions {
        max_iter: 3,
        rng_seed: 77,
        ..Default::default()
    };
    let r = fit(&data, &nominal(), &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.json");
    write_json(&path, &r).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["options"]["max_iter"], 3);
    assert_eq!(v["options"]["rng_seed"], 77);
    let back: p2d_ident::estimation::FitResult = read_json(&path).unwrap();
    assert_eq!(back.groups_hat, r.groups_hat);
}

#[test]
fn multistart_is_reproducible() {
    let freqs = log_grid(1e-4, 1e5, 30).unwrap();
    let data = synth_data(&nominal(), &freqs, 0.0, 1).unwrap();
    let bounds = Bounds::around(&nominal(), 0.5);
    let opts = FitOptions {
        max_iter: 15,
        ..Default::default()
    };
    let a = multistart_fit(&data, &nominal(), &bounds, 3, 21, &opts).unwrap();
    let b = multistart_fit(&data, &nominal(), &bounds, 3, 21, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.starts.len(), 3);
    assert!(a.starts.iter().all(|s| s.cost >= a.best.cost));
}

#[test]
fn nominal_crlb_reflects_the_bilinear_gauge() {
    let g = nominal();
    let s = sensitivity_matrix(&g, &log_grid(1e-4, 1e5, 60).unwrap(), DiffScheme::Central, 1e-4).unwrap();
    let rank = rank_analysis(&s, 1e-8).unwrap();
    assert!(rank.rank < 22);
    let f = fisher_information(&s, 0.01).unwrap();
    for name in [
        "pi_1",
        "pi_3",
        "theta_ce_21",
        "theta_ce_22",
        "theta_ce_31",
        "theta_ce_32",
    ] {
        assert!(f.unbounded.iter().any(|u| u == name), "{name}");
    }
    let k = s.param_labels.iter().position(|l| l == "r_res").unwrap();
    assert!(f.crlb_sd[k].is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_finite_spectrum_round_trips(
        rows in prop::collection::vec((1e-6f64..1e6, -1e3f64..1e3, -1e3f64..1e3), 1..20),
        weighted in any::<bool>(),
    ) {
        let mut points: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, (f, re, im))| (f * (1.0 + i as f64 * 1e-3), num_complex::Complex64::new(*re, *im), weighted.then_some(1.0 + *re * 0.0)))
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        let spec = ImpedanceSpectrum::from_unsorted(points).unwrap();
        let mut buf = Vec::new();
        write_spectrum_to(&mut buf, &spec).unwrap();
        prop_assert_eq!(read_spectrum_from(buf.as_slice()).unwrap(), spec);
    }

    #[test]
    fn grid_strings_parse_to_requested_length(lo in -5.0f64..0.0, span in 0.5f64..8.0, n in 2usize..200) {
        let (a, b) = (10f64.powf(lo), 10f64.powf(lo + span));
        let g: GridSpec = format!("{a},{b},{n}").parse().unwrap();
        let f = g.frequencies().unwrap();
        prop_assert_eq!(f.len(), n);
        prop_assert!(f.windows(2).all(|w| w[0] < w[1]));
    }
}
