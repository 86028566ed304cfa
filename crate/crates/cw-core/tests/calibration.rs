//! The shipped default interval constants must stay in sync with what the
//! calibration routine measures on its default grid.

use cw_core::{calibrate_constants, CalibrationGrid, IntervalConstants};

#[test]
fn default_constants_cover_the_default_grid() {
    let measured = calibrate_constants(&CalibrationGrid::default()).unwrap();
    let shipped = IntervalConstants::default();

    // Shipped values are the measured maxima rounded up; they must dominate
    // the measurement but not by more than the rounding slack.
    for (name, m, s) in [
        ("c_high", measured.c_high, shipped.c_high),
        ("c_low", measured.c_low, shipped.c_low),
        ("d_high", measured.d_high, shipped.d_high),
        ("d_low", measured.d_low, shipped.d_low),
    ] {
        assert!(s >= m, "{name}: shipped {s} below measured {m}");
        assert!(s <= 1.05 * m, "{name}: shipped {s} stale, measured {m}");
    }
}
