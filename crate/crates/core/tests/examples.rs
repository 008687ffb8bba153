//! Runs every example so they keep working.

macro_rules! examples {
    ($($name:ident => $path:literal),* $(,)?) => {
        $(
            #[path = $path]
            mod $name;

            #[test]
            fn $name() {
                $name::main();
            }
        )*
    };
}

examples!(
    series => "../examples/series.rs",
    affine_manifold => "../examples/affine_manifold.rs",
    scattering => "../examples/scattering.rs",
    broken_lines => "../examples/broken_lines.rs",
    structure_constants => "../examples/structure_constants.rs",
    invariant_checks => "../examples/invariant_checks.rs",
    vertex => "../examples/vertex.rs",
    central_fibre => "../examples/central_fibre.rs",
    spines => "../examples/spines.rs",
);
