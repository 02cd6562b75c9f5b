//! Bundled example systems, shipped as JSON under `systems/`.

use crate::coxsys::CoxeterSystem;

macro_rules! bundled {
    ($($(#[$doc:meta])* $fn:ident => $file:literal),* $(,)?) => {
        $(
            $(#[$doc])*
            pub fn $fn() -> CoxeterSystem {
                CoxeterSystem::from_json(include_str!(concat!("../systems/", $file)))
                    .expect(concat!("bundled system ", $file))
            }
        )*

        /// `(file name, system)` for every bundled system.
        pub fn all() -> Vec<(&'static str, CoxeterSystem)> {
            vec![$(($file, $fn())),*]
        }
    };
}

bundled! {
    /// Finite type A2, generators `1`, `2`.
    a2 => "a2.json",
    /// Infinite dihedral group, generators `s`, `t`.
    dihedral_inf => "dihedral_inf.json",
    /// Affine type A2, generators `a`, `b`, `c`.
    affine_a2 => "affine_a2.json",
    /// Affine type C2 over Q(sqrt 2), generators `a`, `b`, `g` with `a`, `g` commuting.
    affine_c2 => "affine_c2.json",
    /// Universal Coxeter group of rank 3, generators `r`, `s`, `t`.
    universal3 => "universal3.json",
    /// Rank 3 with every off-diagonal Gram entry equal to -6/5.
    lorentz_six_fifths => "lorentz_six_fifths.json",
    /// Affine type A3: the 4-cycle 1-2-3-4-1.
    affine_a3 => "affine_a3.json",
    /// Rank 4 with `r-s` and `t-u` of infinite order, other pairs of order 3.
    rank4 => "rank4_uts.json",
    /// Path 1-2-3-4-5 whose end edges have infinite order.
    path5 => "path5.json",
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_bundled_system_loads() {
        let all = super::all();
        assert_eq!(all.len(), 9);
        assert!(all.iter().all(|(_, s)| s.is_irreducible()));
    }
}
