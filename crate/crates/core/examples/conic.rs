//! Conic classification and intersection.

use simfilm::branching::{classify_conic, intersect, Conic};

fn main() -> simfilm::Result<()> {
    // a x^2 + b y^2 + c x + d y + e xy + f
    let circle = Conic {
        a: 1.0,
        b: 1.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
        f: -1.0,
    };
    let hyperbola = Conic {
        a: 1.0,
        b: -1.0,
        c: 0.0,
        d: 0.0,
        e: 0.0,
        f: -0.25,
    };
    for k in [&circle, &hyperbola] {
        let c = classify_conic(k);
        println!(
            "{:?}: discriminant {:.3}, determinant {:.3}",
            c.kind, c.discriminant, c.determinant
        );
    }
    for z in intersect(&circle, &hyperbola)? {
        println!("intersection ({:+.12}, {:+.12})", z[0], z[1]);
    }
    Ok(())
}
