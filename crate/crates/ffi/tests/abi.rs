use std::ffi::{CStr, CString};
use std::ptr;

use phfeat::imaging::{synth_texture, SynthClass};
use phfeat::persistence::{cubical_persistence, rips_persistence, MaxScale};
use phfeat::ulbp::{select_landmarks, Pattern};
use phfeat::vectorize::{Method, VectorizerConfig};
use phfeat::{Barcode, Range};
use phfeat_ffi::*;

fn last_error() -> String {
    let p = ph_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bars(h: *const PhBarcode) -> Vec<PhBar> {
    let n = unsafe { ph_barcode_len(h) };
    (0..n)
        .map(|i| {
            let mut b = PhBar {
                birth: 0.0,
                death: 0.0,
                essential: false,
            };
            assert_eq!(unsafe { ph_barcode_get(h, i, &mut b) }, PhStatus::Ok);
            b
        })
        .collect()
}

fn same(h: *const PhBarcode, b: &Barcode) {
    let got = bars(h);
    assert_eq!(got.len(), b.len());
    for (g, w) in got.iter().zip(b.iter()) {
        assert_eq!((g.birth, g.death, g.essential), (w.birth, w.death, w.essential));
    }
}

fn image(seed: u64) -> (phfeat::GrayImage, *mut PhImage) {
    let img = synth_texture(SynthClass::Holes2, 40, seed).unwrap();
    let mut h = ptr::null_mut();
    let st = unsafe { ph_image_new(img.width(), img.height(), img.pixels().as_ptr(), &mut h) };
    assert_eq!(st, PhStatus::Ok);
    (img, h)
}

#[test]
fn cubical_matches_library() {
    let (img, h) = image(3);
    let (mut b0, mut b1) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { ph_cubical_persistence(h, &mut b0, &mut b1) }, PhStatus::Ok);
    let d = cubical_persistence(&img);
    same(b0, &d.dim0);
    same(b1, &d.dim1);
    assert_eq!(unsafe { (ph_barcode_dim(b0), ph_barcode_dim(b1)) }, (0, 1));
    unsafe {
        ph_barcode_free(b0);
        ph_barcode_free(b1);
        ph_image_free(h);
    }
}

#[test]
fn rips_matches_library() {
    let (img, h) = image(5);
    let p = Pattern::new(4, 1).unwrap();
    let cloud = select_landmarks(&img, p);
    for (scale, lib_scale) in [
        (-1.0, MaxScale::Auto),
        (f64::NAN, MaxScale::Auto),
        (6.0, MaxScale::Fixed(6.0)),
    ] {
        let (mut b0, mut b1) = (ptr::null_mut(), ptr::null_mut());
        let st = unsafe { ph_landmark_rips_persistence(h, 4, 1, scale, &mut b0, &mut b1) };
        assert_eq!(st, PhStatus::Ok);
        let d = rips_persistence(&cloud, lib_scale);
        same(b0, &d.dim0);
        same(b1, &d.dim1);
        unsafe {
            ph_barcode_free(b0);
            ph_barcode_free(b1);
        }
    }
    let (mut b0, mut b1) = (ptr::null_mut(), ptr::null_mut());
    let st = unsafe { ph_landmark_rips_persistence(h, 9, 1, -1.0, &mut b0, &mut b1) };
    assert_eq!(st, PhStatus::InvalidArgument);
    assert!(
        last_error().contains("geometry") || last_error().contains("G9"),
        "{}",
        last_error()
    );
    let st = unsafe { ph_landmark_rips_persistence(h, 4, 1, f64::INFINITY, &mut b0, &mut b1) };
    assert_eq!(st, PhStatus::InvalidArgument);
    unsafe { ph_image_free(h) };
}

#[test]
fn barcode_building_and_aggregation() {
    unsafe {
        let (mut a, mut b, mut c) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(ph_barcode_new(1, &mut a), PhStatus::Ok);
        assert_eq!(ph_barcode_new(1, &mut b), PhStatus::Ok);
        assert_eq!(ph_barcode_new(0, &mut c), PhStatus::Ok);
        assert_eq!(ph_barcode_push(a, 1.0, 3.0, false), PhStatus::Ok);
        assert_eq!(ph_barcode_push(b, 2.0, 5.0, true), PhStatus::Ok);
        assert_eq!(ph_barcode_push(b, 4.0, 2.0, false), PhStatus::InvalidArgument);
        assert_eq!(ph_barcode_push(b, f64::NAN, 2.0, false), PhStatus::InvalidArgument);

        let mut agg = ptr::null_mut();
        let items = [a as *const PhBarcode, b];
        assert_eq!(ph_barcode_aggregate(items.as_ptr(), 2, &mut agg), PhStatus::Ok);
        let got = bars(agg);
        assert_eq!(got.len(), 2);
        assert_eq!((got[1].birth, got[1].death, got[1].essential), (2.0, 5.0, true));

        let mixed = [a as *const PhBarcode, c];
        let mut bad = ptr::null_mut();
        assert_eq!(
            ph_barcode_aggregate(mixed.as_ptr(), 2, &mut bad),
            PhStatus::DimensionMismatch
        );
        assert!(bad.is_null());

        let mut empty = ptr::null_mut();
        assert_eq!(ph_barcode_aggregate(ptr::null(), 0, &mut empty), PhStatus::Ok);
        assert_eq!(ph_barcode_len(empty), 0);

        let mut out = PhBar {
            birth: 0.0,
            death: 0.0,
            essential: false,
        };
        assert_eq!(ph_barcode_get(agg, 2, &mut out), PhStatus::InvalidArgument);

        for h in [a, b, c, agg, empty] {
            ph_barcode_free(h);
        }
    }
}

#[test]
fn vectorize_matches_library() {
    let mut lib = Barcode::new(1);
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(ph_barcode_new(1, &mut h), PhStatus::Ok);
        for (b, d) in [(0.5, 4.0), (1.0, 2.5), (2.0, 6.0)] {
            assert_eq!(ph_barcode_push(h, b, d, false), PhStatus::Ok);
            lib.push(phfeat::Bar::new(b, d).unwrap());
        }
        let range = Range::new(0.0, 6.0).unwrap();
        let methods = [
            (PhMethod::Bc, Method::Bc),
            (PhMethod::Ps, Method::Ps),
            (PhMethod::Es, Method::Es),
            (PhMethod::Pl, Method::Pl),
            (PhMethod::Tc, Method::Tc),
        ];
        for (pm, m) in methods {
            let cfg = VectorizerConfig {
                gamma: 20,
                levels: 3,
                r: 2,
                ..VectorizerConfig::new(m)
            };
            let want = cfg.apply(&lib, range).unwrap().values;
            let mut len = 0;
            assert_eq!(ph_vectorize_len(pm, 20, 3, 2, &mut len), PhStatus::Ok);
            assert_eq!(len, want.len());
            let mut buf = vec![f64::NAN; len + 3];
            let mut written = 0;
            let st = ph_vectorize(h, pm, 20, 3, 2, 0.0, 6.0, buf.as_mut_ptr(), buf.len(), &mut written);
            assert_eq!(st, PhStatus::Ok);
            assert_eq!(written, len);
            assert_eq!(&buf[..len], &want[..]);
            assert!(buf[len..].iter().all(|v| v.is_nan()));
        }
        let mut buf = [0.0; 4];
        let mut written = 0;
        let st = ph_vectorize(h, PhMethod::Pl, 20, 3, 2, 0.0, 6.0, buf.as_mut_ptr(), 4, &mut written);
        assert_eq!(st, PhStatus::BufferTooSmall);
        assert_eq!(written, 60);
        let st = ph_vectorize(h, PhMethod::Bc, 1, 3, 2, 0.0, 6.0, buf.as_mut_ptr(), 4, &mut written);
        assert_eq!(st, PhStatus::InvalidArgument);
        let st = ph_vectorize(h, PhMethod::Tc, 20, 3, 0, 0.0, 6.0, buf.as_mut_ptr(), 4, &mut written);
        assert_eq!(st, PhStatus::InvalidArgument);
        ph_barcode_free(h);
    }
}

#[test]
fn null_handles_and_errors() {
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(ph_image_new(2, 2, ptr::null(), &mut img), PhStatus::NullPointer);
        assert!(last_error().contains("pixels"));
        let px = [1.0, 2.0, 3.0];
        assert_eq!(ph_image_new(2, 2, px.as_ptr(), ptr::null_mut()), PhStatus::NullPointer);
        assert_eq!(ph_image_new(0, 3, px.as_ptr(), &mut img), PhStatus::InvalidArgument);
        assert_eq!(
            ph_image_new(3, 1, [1.0, f64::NAN, 0.0].as_ptr(), &mut img),
            PhStatus::InvalidArgument
        );
        assert_eq!(ph_image_width(ptr::null()), 0);
        assert_eq!(ph_barcode_len(ptr::null()), 0);
        ph_image_free(ptr::null_mut());
        ph_barcode_free(ptr::null_mut());

        let (mut b0, mut b1) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            ph_cubical_persistence(ptr::null(), &mut b0, &mut b1),
            PhStatus::NullPointer
        );

        let missing = CString::new("/nonexistent/image.pgm").unwrap();
        assert_eq!(ph_image_load(missing.as_ptr(), &mut img), PhStatus::IoError);
    }
}

#[test]
fn load_parse_error_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.pgm");
    std::fs::write(&path, b"P2\n2 2\n255\n1 2 x 4\n").unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut img = ptr::null_mut();
    assert_eq!(unsafe { ph_image_load(c.as_ptr(), &mut img) }, PhStatus::ParseError);
    assert!(last_error().contains("byte"), "{}", last_error());

    let good = dir.path().join("ok.pgm");
    std::fs::write(&good, b"P2\n2 1\n255\n7 9\n").unwrap();
    let c = CString::new(good.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ph_image_load(c.as_ptr(), &mut img) }, PhStatus::Ok);
    assert_eq!(unsafe { (ph_image_width(img), ph_image_height(img)) }, (2, 1));
    unsafe { ph_image_free(img) };
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut img = ptr::null_mut();
        assert_eq!(ph_image_new(1, 1, ptr::null(), &mut img), PhStatus::NullPointer);
    }
    std::thread::spawn(|| assert!(ph_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(!ph_last_error_message().is_null());
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ph_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
