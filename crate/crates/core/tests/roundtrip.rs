use proptest::prelude::*;
use tactile_core::schema::{read_dataset, write_dataset, DatasetMeta};
use tactile_core::sim::{
    generate_single_force_dataset, generate_two_force_dataset, SingleForceProtocol, SkinModel,
    TwoForceProtocol,
};
use tactile_core::{
    CapacitanceFrame, Dataset, ForceLevel, NodeCoord, Schema, SingleContactSample, StretchRatio,
    TwoContactSample,
};

fn round_trip(ds: &Dataset) -> Dataset {
    let (mut csv, mut meta) = (Vec::new(), Vec::new());
    write_dataset(ds, &mut csv, &mut meta).unwrap();
    read_dataset(csv.as_slice(), Some(meta.as_slice())).unwrap()
}

/// Half a unit in the ninth significant digit.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 5e-9 * a.abs().max(f64::MIN_POSITIVE) * 1.000001
}

#[test]
fn generated_datasets_survive_exactly() {
    let protocol = SingleForceProtocol {
        reps_per_cell: 1,
        ..SingleForceProtocol::default()
    };
    let full = generate_single_force_dataset(&SkinModel::default(), &protocol).unwrap();
    let hundred: Vec<_> = full
        .as_single()
        .unwrap()
        .iter()
        .step_by(12)
        .take(100)
        .copied()
        .collect();
    let ds = Dataset::single(full.meta.clone(), hundred);
    assert_eq!(ds.len(), 100);
    assert_eq!(round_trip(&ds), ds);

    let two =
        generate_two_force_dataset(&SkinModel::default(), &TwoForceProtocol::default()).unwrap();
    assert_eq!(round_trip(&two), two);
}

fn frame() -> impl Strategy<Value = CapacitanceFrame> {
    (
        prop::array::uniform10(1e-3..50.0f64),
        prop::array::uniform10(1e-3..50.0f64),
    )
        .prop_map(|(cx, cy)| CapacitanceFrame::new(cx, cy).unwrap())
}

fn contact() -> impl Strategy<Value = (ForceLevel, NodeCoord)> {
    prop_oneof![
        Just((ForceLevel::ZERO, NodeCoord::NONE)),
        (1e-3..20.0f64, 1u8..=10, 1u8..=10)
            .prop_map(|(f, x, y)| (ForceLevel::new(f).unwrap(), NodeCoord::new(x, y).unwrap())),
    ]
}

fn single_sample() -> impl Strategy<Value = SingleContactSample> {
    (frame(), contact(), 1.0..3.0f64).prop_map(|(fr, (f, n), l)| {
        SingleContactSample::new(fr, f, n, StretchRatio::new(l).unwrap()).unwrap()
    })
}

fn two_sample() -> impl Strategy<Value = TwoContactSample> {
    (frame(), contact(), contact())
        .prop_filter("distinct nodes", |(_, a, b)| {
            a.1 != b.1 || !a.1.is_contact()
        })
        .prop_map(|(fr, a, b)| TwoContactSample::new(fr, a.0, a.1, b.0, b.1).unwrap())
}

fn frames_close(a: &CapacitanceFrame, b: &CapacitanceFrame) -> bool {
    a.features()
        .iter()
        .zip(b.features())
        .all(|(x, y)| close(*x, y))
}

proptest! {
    #[test]
    fn any_single_dataset(samples in prop::collection::vec(single_sample(), 0..30)) {
        let ds = Dataset::single(DatasetMeta::unknown(Schema::SingleContact), samples.clone());
        let back = round_trip(&ds);
        prop_assert_eq!(&back.meta, &ds.meta);
        let got = back.as_single().unwrap();
        prop_assert_eq!(got.len(), samples.len());
        for (g, s) in got.iter().zip(&samples) {
            prop_assert!(frames_close(&s.frame, &g.frame));
            prop_assert!(close(s.force.newtons(), g.force.newtons()) || s.force.newtons() == 0.0 && g.force.newtons() == 0.0);
            prop_assert!(close(s.stretch.value(), g.stretch.value()));
            prop_assert_eq!(s.node, g.node);
        }
    }

    #[test]
    fn any_two_dataset(samples in prop::collection::vec(two_sample(), 0..30)) {
        let ds = Dataset::two(DatasetMeta::unknown(Schema::TwoContact), samples.clone());
        let back = round_trip(&ds);
        let got = back.as_two().unwrap();
        prop_assert_eq!(got.len(), samples.len());
        for (g, s) in got.iter().zip(&samples) {
            prop_assert!(frames_close(&s.frame, &g.frame));
            prop_assert_eq!((s.node1, s.node2), (g.node1, g.node2));
            prop_assert!(s.force1 == g.force1 || close(s.force1.newtons(), g.force1.newtons()));
            prop_assert!(s.force2 == g.force2 || close(s.force2.newtons(), g.force2.newtons()));
        }
    }
}
