//! Validation of finite unitary groups: a fixed-point-free cyclic group and
//! a reflection group that fixes a line.

use bergman::{FiniteUnitaryGroup, GroupSpec, Result};

fn main() -> Result<()> {
    let specs = [
        "cyclic-diagonal:1,2/5",
        "cyclic-diagonal:1,1,1/2",
        r#"{"type": "explicit", "matrices": [[[[1,0],[0,0]],[[0,0],[1,0]]], [[[-1,0],[0,0]],[[0,0],[1,0]]]]}"#,
    ];
    for text in specs {
        let spec: GroupSpec = text.parse()?;
        let dim = match &spec {
            GroupSpec::CyclicDiagonal { weights, .. } => weights.len(),
            _ => 2,
        };
        let group: FiniteUnitaryGroup = spec.build(dim)?;
        let report = group.validate();
        println!(
            "{text}: order {}, passed {}, unitary defect {:.1e}, closure defect {:.1e}, min |det(γ − I)| {:.3}",
            group.order(),
            report.passed(),
            report.max_unitarity_defect,
            report.max_closure_defect,
            report.min_fixed_point_margin
        );
    }
    Ok(())
}
