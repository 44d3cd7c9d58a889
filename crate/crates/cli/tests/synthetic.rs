use featbench_cli::synthetic::{generate, SyntheticSpec, MANIFEST_NAME};
use featbench_core::bench::DatasetManifest;
use featbench_core::image::load_image;
use featbench_core::Image;

fn spec(n_points: usize) -> SyntheticSpec {
    SyntheticSpec {
        n_points,
        ..SyntheticSpec::default()
    }
}

/// `img` turned by `deg` about its centre: output pixel `p` reads the input
/// at `R(deg) p`.
fn turned(img: &Image, deg: f64) -> Vec<Option<f64>> {
    let (w, h) = (img.width(), img.height());
    let (s, c) = deg.to_radians().sin_cos();
    let (hw, hh) = (w as f64 / 2.0, h as f64 / 2.0);
    let mut out = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let (du, dv) = (u as f64 + 0.5 - hw, v as f64 + 0.5 - hh);
            let x = hw + c * du - s * dv - 0.5;
            let y = hh + s * du + c * dv - 0.5;
            let inside = x >= 0.0 && y >= 0.0 && x <= (w - 1) as f64 && y <= (h - 1) as f64;
            out.push(inside.then(|| img.sample_bilinear(x, y)));
        }
    }
    out
}

#[test]
fn one_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let m = generate(dir.path(), &spec(1)).unwrap();
    assert_eq!((m.templates.len(), m.queries.len()), (1, 15));
    let pgms = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pgm"))
        .count();
    assert_eq!(pgms, 16);
    let loaded = DatasetManifest::load(dir.path().join(MANIFEST_NAME)).unwrap();
    assert_eq!(loaded, m);

    let template = load_image(&m.templates[0].path).unwrap();
    let find = |h: u8, yaw: i32| {
        let q = m.queries.iter().find(|q| q.pose.height_level == h && q.pose.yaw == yaw).unwrap();
        load_image(&q.path).unwrap()
    };
    assert_eq!(find(1, 0), template);
    assert_ne!(find(0, 0), template);

    let q15 = find(1, 15);
    let oracle = turned(&template, 15.0);
    let (mut sum, mut n) = (0.0, 0usize);
    for (i, o) in oracle.iter().enumerate() {
        if let Some(v) = o {
            sum += (q15.data()[i] as f64 - v).abs();
            n += 1;
        }
    }
    assert!(n > template.data().len() / 2);
    let mad = sum / n as f64;
    assert!(mad < 3.0, "mean abs diff {mad}");
}

#[test]
fn generation_is_seeded() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let small = SyntheticSpec {
        width: 160,
        height: 128,
        ..spec(2)
    };
    let ma = generate(a.path(), &small).unwrap();
    let mb = generate(b.path(), &small).unwrap();
    for (x, y) in ma.queries.iter().zip(&mb.queries) {
        assert_eq!(std::fs::read(&x.path).unwrap(), std::fs::read(&y.path).unwrap());
    }
    let c = tempfile::tempdir().unwrap();
    let mc = generate(c.path(), &SyntheticSpec { seed: 99, ..small.clone() }).unwrap();
    assert_ne!(std::fs::read(&ma.queries[0].path).unwrap(), std::fs::read(&mc.queries[0].path).unwrap());
}

#[test]
fn bad_specs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(generate(dir.path(), &spec(0)).is_err());
    assert!(generate(dir.path(), &SyntheticSpec { width: 32, ..spec(1) }).is_err());
}
