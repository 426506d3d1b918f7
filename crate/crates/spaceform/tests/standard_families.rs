use spaceform::families::{FamilySpec, HypersurfacePatch};
use spaceform::numgeom::{verify_family, FdSteps, SampleGrid, Tolerances};

#[test]
fn every_standard_family_is_levi_flat_and_minimal() {
    let grid = SampleGrid::new(8, 4, 1).unwrap();
    let mut failures = Vec::new();
    for spec in FamilySpec::standard() {
        let rep = verify_family(&HypersurfacePatch::new(spec), grid, Tolerances::default(), FdSteps::default());
        println!(
            "{:<28} H {:.2e} levi {:.2e} J {:.2e} K {:?} skipped {}",
            rep.family, rep.max_abs_mean_curvature, rep.max_levi_defect, rep.max_j_defect, rep.max_leaf_curvature_residual, rep.skipped_count
        );
        if !rep.pass || rep.skipped_count > 0 {
            failures.push(rep.family);
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn perturbed_families_fail() {
    let grid = SampleGrid::new(6, 3, 0).unwrap();
    for id in ["t2diag:lambda=2:r=1", "t2diag:lambda=2:r=0", "t2diag:lambda=2:r=-1"] {
        let spec: FamilySpec = id.parse().unwrap();
        let rep = verify_family(&HypersurfacePatch::perturbed(spec, 0.3).unwrap(), grid, Tolerances::default(), FdSteps::default());
        assert!(!rep.pass, "{id}");
        assert!(rep.max_abs_mean_curvature > 1e-3, "{id}: {}", rep.max_abs_mean_curvature);
    }
}
