use proptest::prelude::*;
use vcd_core::geometry::PixelRect;
use vcd_core::sim::{parse_scenario, render_depth_frame};
use vcd_core::vision::*;

fn scenario(table: &str) -> vcd_core::sim::RoomScenario {
    parse_scenario(&format!(
        "duration = 2.0\nparticipant = [{{ position = [0.5, 2.5, 1.2], motion = 0.0 }}]\n\
         [room]\nwidth = 6.0\ndepth = 6.0\nheight = 3.0\n[sensors]\nhole_fraction = 0.0\n{table}"
    ))
    .unwrap()
}

#[test]
fn table_plane_from_rendered_depth() {
    let s = scenario("[table]\nheight = 0.75\nx_min = -0.6\nx_max = 0.6\ny_min = 1.0\ny_max = 3.0\n");
    let d = render_depth_frame(&s, 0.0).unwrap();
    let cam = s.sensors.depth_intrinsics().unwrap();
    match estimate_table(&d, &cam).unwrap() {
        TableExtent::Present { height_m, azimuth_deg, depth_m } => {
            assert!((height_m - 0.75).abs() <= 0.03, "height {height_m}");
            // Near edge spans atan(0.6 / 1.0) either side.
            let edge = 0.6f64.atan2(1.0).to_degrees();
            assert!(azimuth_deg.0 >= -edge - 2.0 && azimuth_deg.1 <= edge + 2.0, "{azimuth_deg:?}");
            assert!(azimuth_deg.1 - azimuth_deg.0 > edge, "{azimuth_deg:?}");
            assert!(depth_m.0 >= 0.9 && depth_m.1 <= 3.1, "{depth_m:?}");
        }
        TableExtent::Absent => panic!("table not found"),
    }
}

#[test]
fn no_table_in_an_empty_room() {
    let s = scenario("");
    let d = render_depth_frame(&s, 0.0).unwrap();
    let cam = s.sensors.depth_intrinsics().unwrap();
    assert_eq!(estimate_table(&d, &cam).unwrap(), TableExtent::Absent);
}

#[test]
fn holes_are_filled_before_use() {
    let mut depths = vec![2.0; 64];
    depths[27] = 0.0;
    let d = DepthFrame::new(8, 8, depths, 0.0).unwrap();
    let n = normalize_depth(&d);
    assert_eq!(n.valid_count(), 64);
    assert_eq!(n.at(3, 3), 2.0);
}

fn image() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..20, 1usize..20).prop_flat_map(|(w, h)| (Just(w), Just(h), prop::collection::vec(0.0f64..1.0, w * h)))
}

fn direct_sum(q: &[i64], w: usize, r: &PixelRect) -> i64 {
    (r.y..r.y + r.h).flat_map(|y| (r.x..r.x + r.w).map(move |x| q[y * w + x])).sum()
}

proptest! {
    #[test]
    fn rect_sums_match_direct_sums((w, h, px) in image(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let ii = IntegralImage::new(w, h, &px).unwrap();
        let q: Vec<i64> = px.iter().map(|&p| quantize(p)).collect();
        let (x0, y0) = (a.index(w), a.index(h));
        let (x1, y1) = (x0 + 1 + b.index(w - x0), y0 + 1 + b.index(h - y0));
        let r = PixelRect::new(x0, y0, x1 - x0, y1 - y0);
        prop_assert_eq!(ii.rect_sum_fixed(&r), direct_sum(&q, w, &r));
        let whole = PixelRect::new(0, 0, w, h);
        prop_assert_eq!(ii.rect_sum_fixed(&whole), q.iter().sum::<i64>());
    }

    /// Moving the image and the region together leaves every response unchanged.
    #[test]
    fn haar_responses_follow_a_shift((w, h, px) in image(), dx in 0usize..6, dy in 0usize..6) {
        let bank = default_bank();
        let region = PixelRect::new(0, 0, w, h);
        let a = haar_features(&IntegralImage::new(w, h, &px).unwrap(), &region, &bank).unwrap();
        let (sw, sh) = (w + dx, h + dy);
        let mut shifted = vec![0.5; sw * sh];
        for y in 0..h {
            for x in 0..w {
                shifted[(y + dy) * sw + x + dx] = px[y * w + x];
            }
        }
        let moved = PixelRect::new(dx, dy, w, h);
        let b = haar_features(&IntegralImage::new(sw, sh, &shifted).unwrap(), &moved, &bank).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn constant_images_have_zero_response(w in 1usize..20, h in 1usize..20, v in 0.0f64..1.0) {
        let ii = IntegralImage::new(w, h, &vec![v; w * h]).unwrap();
        let r = haar_features(&ii, &PixelRect::new(0, 0, w, h), &default_bank()).unwrap();
        prop_assert!(r.iter().all(|x| *x == 0.0));
    }
}
