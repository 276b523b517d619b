use scatterec_demo::{pdp_series, scene_view, tvtf_view};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn scene_view_has_every_layer() {
    let v = parse(scene_view("vertical", "low", 3, 0, 0).unwrap());
    for key in ["objects", "points", "clusters", "scatterers"] {
        assert!(v[key].as_array().is_some_and(|a| !a.is_empty()), "{key} empty");
    }
    assert!(v["points"].as_array().unwrap().len() <= 6000);
    assert_eq!(v["clusters"][0]["footprint"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_arguments_are_reported() {
    assert!(scene_view("diagonal", "low", 1, 0, 0).unwrap_err().contains("diagonal"));
    assert!(scene_view("vertical", "low", 1, 0, 17).unwrap_err().contains("link 17"));
    assert!(tvtf_view("vertical", "low", 1, 0, 0, f64::NAN, 8).is_err());
}

#[test]
fn pdp_frames_start_at_los() {
    let v = parse(pdp_series("vertical", "medium", 4, 0, 5).unwrap());
    assert_eq!(v["bin_width"].as_f64().unwrap(), 0.5e-9);
    let frames = v["frames"].as_array().unwrap();
    assert!(!frames.is_empty());
    for f in frames {
        let total: f64 = f["powers_db"].as_array().unwrap().iter().map(|d| 10f64.powf(d.as_f64().unwrap() / 10.0)).sum();
        // Empty bins are reported at the -120 dB floor.
        let empty = f["powers_db"].as_array().unwrap().iter().filter(|d| d.as_f64().unwrap() <= -119.9).count() as f64;
        assert!((total - empty * 1e-12 - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tvtf_at_band_centre_ignores_chi() {
    let a = parse(tvtf_view("vertical", "low", 5, 0, 0, 0.0, 3).unwrap());
    let b = parse(tvtf_view("vertical", "low", 5, 0, 0, 2.0, 3).unwrap());
    let freqs = a["freqs"].as_array().unwrap();
    assert_eq!(freqs.len(), 3);
    // With three points the middle one is f_c - B/2 + B/3, not the centre; only
    // the ratio (f / f_c)^chi separates the two curves.
    for i in 0..3 {
        let f = freqs[i].as_f64().unwrap();
        let da = a["mag_db"][i].as_f64().unwrap();
        let db = b["mag_db"][i].as_f64().unwrap();
        assert!((db - da - 20.0 * 2.0 * (f / 28e9).log10()).abs() < 1e-9);
    }
}
