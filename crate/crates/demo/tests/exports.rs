use isoflow_demo::{adaptedness_json, flow_curve_json, principal_curvatures_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn flow_curve_tracks_closed_form() {
    let v = parse(&flow_curve_json("su21", 2.0, 8.0).unwrap());
    let numeric = v["numeric"].as_array().unwrap();
    let closed = v["closed_form"].as_array().unwrap();
    assert_eq!(numeric.len(), closed.len());
    assert!(numeric.len() > 100);
    for (a, b) in numeric.iter().zip(closed) {
        assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-8);
    }
    assert!((numeric[0].as_f64().unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn principal_curvatures_at_zero_offset() {
    // sl2r: the leaf through t = 0 is totally geodesic, and at t = 1 the kernel curvature is -L tanh L
    let v = parse(&principal_curvatures_json("sl2r", -1.0, 1.0, 3).unwrap());
    let mid: Vec<f64> = v["eigenvalues"][1].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(mid.iter().all(|e| e.abs() < 1e-12), "{mid:?}");
    let end = v["eigenvalues"][2].as_array().unwrap();
    let l = 1.0 / 2f64.sqrt();
    let expected = -l * (l * 1.0f64).tanh();
    assert!(end.iter().any(|e| (e.as_f64().unwrap() - expected).abs() < 1e-12));
}

#[test]
fn adaptedness_dichotomy() {
    assert_eq!(parse(&adaptedness_json("sl3r", 1, 0.5).unwrap())["verdict"], "adapted");
    let v = parse(&adaptedness_json("su31", 1, 0.5).unwrap());
    assert_eq!(v["verdict"], "not_adapted");
    assert_eq!(v["verified"], true);
    assert!(v["doubled"][0]["measured_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_input_is_an_error() {
    assert!(flow_curve_json("so42", 1.0, 1.0).is_err());
    assert!(principal_curvatures_json("sl2r", 1.0, 0.0, 5).is_err());
    assert!(adaptedness_json("sl2r", 3, 0.0).is_err());
}
