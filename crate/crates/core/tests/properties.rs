use proptest::prelude::*;

use phfeat::persistence::{cubical_persistence, rips_persistence, MaxScale};
use phfeat::pipeline::shift_barcode;
use phfeat::ulbp::PointCloud;
use phfeat::GrayImage;

fn arb_image() -> impl Strategy<Value = GrayImage> {
    (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..32, w * h)
            .prop_map(move |px| GrayImage::new(w, h, px.into_iter().map(f64::from).collect()).unwrap())
    })
}

fn arb_cloud() -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((0i32..12, 0i32..12), 0..12)
        .prop_map(|pts| PointCloud::new(pts.into_iter().map(|(x, y)| (x as f64, y as f64)).collect()))
}

proptest! {
    #[test]
    fn intensity_shift_shifts_bars(img in arb_image(), c in -40i32..40) {
        let c = f64::from(c);
        let base = cubical_persistence(&img);
        let moved = cubical_persistence(&img.map(|v| v + c));
        prop_assert_eq!(&moved.dim0, &shift_barcode(&base.dim0, c));
        prop_assert_eq!(&moved.dim1, &shift_barcode(&base.dim1, c));
    }

    #[test]
    fn cubical_bars_are_ordered_and_capped(img in arb_image()) {
        let (_, hi) = img.min_max();
        let d = cubical_persistence(&img);
        prop_assert_eq!(d.dim0.iter().filter(|b| b.essential).count(), 1);
        prop_assert!(d.dim1.iter().all(|b| !b.essential));
        for b in d.dim0.iter().chain(d.dim1.iter()) {
            prop_assert!(b.birth <= b.death && b.death <= hi);
        }
    }

    #[test]
    fn rips_bars_are_ordered_and_capped(cloud in arb_cloud(), cap in prop::option::of(0.0f64..15.0)) {
        let scale = cap.map_or(MaxScale::Auto, MaxScale::Fixed);
        let d = rips_persistence(&cloud, scale);
        let limit = cap.unwrap_or(f64::INFINITY);
        for b in d.dim0.iter().chain(d.dim1.iter()) {
            prop_assert!(b.birth <= b.death);
            prop_assert!(b.death <= limit);
        }
        if !cloud.is_empty() {
            prop_assert_eq!(d.dim0.iter().filter(|b| b.essential).count() >= 1, true);
        }
    }

    #[test]
    fn rips_is_translation_invariant(cloud in arb_cloud(), dx in -50i32..50, dy in -50i32..50) {
        let moved = PointCloud::new(
            cloud.points.iter().map(|&(x, y)| (x + f64::from(dx), y + f64::from(dy))).collect(),
        );
        prop_assert_eq!(
            rips_persistence(&cloud, MaxScale::Auto),
            rips_persistence(&moved, MaxScale::Auto)
        );
    }
}
