#![allow(dead_code)]

use bislant_core::immersion::{load_spec, ImmersionSpec};

pub const EX61: &str = "\
ambient 4 signature + + - -
chart u v w
domain u 0.5 2.0 ; v 0.0 6.283185 ; w 0.5 2.0
map w*u*cos(v) , w*u*sin(v) , w*cos(v) , w*sin(v)
dist D1 = du , dw
dist D2 = dv
claim warped base D1 fiber D2 f sqrt(w^2*(1+u^2))
";

pub const EX62: &str = "\
ambient 6 signature - - - + + +
chart u v w
domain u 0.0 6.283185 ; v 0.5 2.0 ; w 0.5 2.0
map v*cos(u) , v*sin(u) , -v+w , w*cos(u) , w*sin(u) , v+w
dist D1 = du
dist D2 = dv , dw
claim warped base D2 fiber D1 f sqrt(v^2+w^2)
";

pub fn spec(text: &str) -> ImmersionSpec {
    load_spec(text).unwrap()
}

/// Surface of revolution `(u, r cos t, r sin t, c u)` with `r = a + b u²`,
/// a warped product with base `du` and fiber `dt` for every choice of
/// parameters. `scale_base`/`scale_fiber` multiply the declared fields.
pub fn revolution(a: f64, b: f64, c: f64, scale_base: f64, scale_fiber: f64) -> String {
    format!(
        "ambient 4 signature + + + -
chart u t
domain u 0.2 1.5 ; t -3.0 3.0
map u , ({a}+{b}*u^2)*cos(t) , ({a}+{b}*u^2)*sin(t) , {c}*u
dist D1 = {scale_base}*du
dist D2 = {scale_fiber}*dt
claim warped base D1 fiber D2 f {a}+{b}*u^2
"
    )
}
