use hecke_core::characters::character_group;
use hecke_core::petersson::delta_geometric;
use hecke_demo::{kloosterman_scatter, petersson_partial_sums, petersson_tail, sato_tate_histogram};

#[test]
fn scatter_stays_under_weil() {
    let v = kloosterman_scatter(1, 3, 300).unwrap();
    assert_eq!(v.len(), 900);
    for t in v.chunks(3) {
        assert!(t[1].abs() <= t[2] + 1e-9, "c = {}", t[0]);
    }
    assert!(kloosterman_scatter(1, 1, 0).is_err());
}

#[test]
fn histogram_masses_sum_to_one() {
    let v = sato_tate_histogram(101, 12).unwrap();
    let (obs, st) = v.split_at(12);
    assert!((obs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((st.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(sato_tate_histogram(100, 12).is_err());
}

#[test]
fn partial_sums_match_core() {
    let v = petersson_partial_sums(12, 1, 1, 2, 500, 1).unwrap();
    let last = v[v.len() - 1];
    let chi = character_group(1).unwrap().trivial();
    let d = delta_geometric(12, &chi, 1, 2, Some(500)).unwrap();
    assert!((last - d.value.re).abs() < 1e-10);
    let w4 = petersson_partial_sums(4, 1, 1, 1, 2000, 100).unwrap();
    assert!(w4[w4.len() - 1].abs() <= petersson_tail(4, 1, 1, 1, 2000).unwrap() + 1e-6);
    assert!(petersson_partial_sums(3, 1, 1, 1, 10, 1).is_err());
}
