// The annotation algebra by hand: translating casts to coercions, merging
// refinement lists, and merging annotations in each mode.

use lambda_h::semantics::{coerce, list_merge, merge, ref_drop, Oracle};
use lambda_h::surface::{parse_type, print_annotation, print_coercion, print_list};
use lambda_h::syntax::{Annotation, Coercion, Label, Mode, TypeSet};

pub fn run_example() -> Result<String, Box<dyn std::error::Error>> {
    let any = parse_type("{x:Int|true}")?;
    let nat = parse_type("{x:Int|x >= 0}")?;
    let even = parse_type("{x:Int|x mod 2 = 0}")?;
    let nz = parse_type("{x:Int|x <> 0}")?;
    let l = |s: &str| Label::named(s);

    let c1 = coerce(&any, &nat, &l("l1")).expect("similar");
    let c2 = coerce(&nat, &even, &l("l2")).expect("similar");
    println!("coerce ANY => NAT   = {}", print_coercion(&c1));

    let (Coercion::Refs(r1), Coercion::Refs(r2)) = (&c1, &c2) else { unreachable!() };
    let merged = list_merge(&Oracle::AlphaEq, r1, r2);
    let again = list_merge(&Oracle::AlphaEq, &merged, r2);
    println!("r1 |> r2            = {}", print_list(&merged));
    println!("(r1 |> r2) |> r2    = {}", print_list(&again));
    println!("(r1 |> r2) \\ EVEN   = {}", print_list(&ref_drop(&Oracle::AlphaEq, &merged, &even)));

    // Function coercions merge contravariantly in the domain.
    let f1 = coerce(&fun(&nat, &any), &fun(&any, &nz), &l("f1")).expect("similar");
    let f2 = coerce(&fun(&any, &nz), &fun(&even, &nat), &l("f2")).expect("similar");
    let fm = merge(Mode::Eidetic, &Oracle::AlphaEq, &fun(&nat, &any), &Annotation::Coerce(f1),
        &fun(&any, &nz), &Annotation::Coerce(f2), &fun(&even, &nat)).expect("mergeable");
    println!("function merge      = {}", print_annotation(&fm));

    // Forgetful casts carry nothing; heedful ones remember the types passed through.
    let forget = merge(Mode::Forgetful, &Oracle::AlphaEq, &any, &Annotation::Empty, &nat, &Annotation::Empty, &even);
    let none = Annotation::Types(TypeSet::new());
    let heed = merge(Mode::Heedful, &Oracle::AlphaEq, &any, &none, &nat, &none, &even);
    println!("forgetful merge     = {forget:?}");
    println!("heedful merge       = {}", print_annotation(&heed.expect("mergeable")));
    Ok(print_list(&merged))
}

fn fun(a: &lambda_h::syntax::Type, b: &lambda_h::syntax::Type) -> lambda_h::syntax::Type {
    lambda_h::syntax::Type::fun(a.clone(), b.clone())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
