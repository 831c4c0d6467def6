use phfeat::imaging::{synth_texture, SynthClass};
use phfeat::persistence::cubical_persistence;
use phfeat::persistence::oracle::oracle_betti_cubical;

fn long_h1_bars(class: SynthClass, seed: u64) -> usize {
    let img = synth_texture(class, 64, seed).unwrap();
    let (lo, hi) = img.min_max();
    let d = cubical_persistence(&img);
    d.dim1.iter().filter(|b| b.lifespan() > 0.5 * (hi - lo)).count()
}

#[test]
fn classes_differ_by_long_loops() {
    for seed in 0..25 {
        assert_eq!(long_h1_bars(SynthClass::Holes1, seed), 1, "holes1 seed {seed}");
        assert_eq!(long_h1_bars(SynthClass::Holes2, seed), 2, "holes2 seed {seed}");
    }
}

#[test]
fn loops_visible_between_interior_and_rim() {
    // interiors (<= 75) are present at 150 and rims (>= 200) are not
    for seed in 0..10 {
        for class in [SynthClass::Holes1, SynthClass::Holes2] {
            let img = synth_texture(class, 48, seed).unwrap();
            let (b0, b1) = oracle_betti_cubical(&img, 150.0);
            assert_eq!(b1, class.annuli(), "{class:?} seed {seed}");
            assert_eq!(b0, 1 + class.annuli(), "{class:?} seed {seed}");
            let d = cubical_persistence(&img);
            assert_eq!(d.betti_at(1, 150.0), b1);
            assert_eq!(d.betti_at(0, 150.0), b0);
        }
    }
}
