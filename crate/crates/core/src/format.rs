/// Formats `x` with six significant digits in plain decimal notation,
/// trailing zeros kept, e.g. `0.500000`, `12.3457`, `1500.00`.
///
/// Values of a million or more print as rounded integers.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let mut magnitude = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade (9.999999 -> 10.0000)
    for _ in 0..2 {
        let decimals = (5 - magnitude).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let rounded: f64 = s.parse().expect("formatted float parses");
        let actual = if rounded == 0.0 {
            magnitude
        } else {
            rounded.abs().log10().floor() as i32
        };
        if actual == magnitude {
            return s;
        }
        magnitude = actual;
    }
    format!("{:.*}", (5 - magnitude).max(0) as usize, x)
}
