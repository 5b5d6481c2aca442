use fdl_core::gql::{haversine_km, EARTH_RADIUS_KM};
use fdl_core::graph::GeoPoint;

#[derive(serde::Deserialize)]
struct Pair {
    lat1: f64,
    lon1: f64,
    lat2: f64,
    lon2: f64,
    km: f64,
}

fn pairs() -> Vec<Pair> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/haversine_expected.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn km(p: &Pair) -> f64 {
    haversine_km(GeoPoint::new(p.lat1, p.lon1).unwrap(), GeoPoint::new(p.lat2, p.lon2).unwrap())
}

#[test]
fn haversine_within_half_percent_of_oracle() {
    let pairs = pairs();
    assert!(pairs.len() >= 100);
    for p in &pairs {
        let got = km(p);
        assert!((got - p.km).abs() <= 0.005 * p.km + 1e-9, "{got} vs {}", p.km);
    }
}

#[test]
fn one_degree_of_longitude_on_the_equator() {
    let d = haversine_km(GeoPoint::new(0.0, 0.0).unwrap(), GeoPoint::new(0.0, 1.0).unwrap());
    assert!((d - 111.19).abs() < 0.01, "{d}");
    assert_eq!(EARTH_RADIUS_KM, 6371.0);
}

#[test]
fn distance_is_symmetric_and_zero_on_the_diagonal() {
    for p in pairs() {
        let a = GeoPoint::new(p.lat1, p.lon1).unwrap();
        let b = GeoPoint::new(p.lat2, p.lon2).unwrap();
        assert!((haversine_km(a, b) - haversine_km(b, a)).abs() < 1e-9);
        assert_eq!(haversine_km(a, a), 0.0);
    }
}
