//! Spec files shipped with the binary.

pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "ex6.1",
        description: "pointwise bi-slant warped product in R^4",
        text: include_str!("../fixtures/ex61.lps"),
    },
    Fixture {
        name: "ex6.2",
        description: "bi-slant warped product in R^6",
        text: include_str!("../fixtures/ex62.lps"),
    },
    Fixture {
        name: "toy_flat",
        description: "flat plane, invariant and anti-invariant lines",
        text: include_str!("../fixtures/toy_flat.lps"),
    },
    Fixture {
        name: "toy_cr",
        description: "invariant plane times anti-invariant line",
        text: include_str!("../fixtures/toy_cr.lps"),
    },
    Fixture {
        name: "toy_nonintegrable",
        description: "distribution whose bracket leaves it",
        text: include_str!("../fixtures/toy_nonintegrable.lps"),
    },
    Fixture {
        name: "toy_perturbed",
        description: "orthogonal split that is not warped",
        text: include_str!("../fixtures/toy_perturbed.lps"),
    },
    Fixture {
        name: "toy_nonorthogonal",
        description: "F mixes the two distributions",
        text: include_str!("../fixtures/toy_nonorthogonal.lps"),
    },
];

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_load() {
        for f in FIXTURES {
            bislant_core::immersion::load_spec(f.text).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        }
    }
}
