use vstd::prelude::*;

verus! {

fn abs_val(x: i32) -> (r: i32)
    requires
        x > i32::MIN,
    ensures
        r >= 0,
        r == x || r == -x,
{
    if x < 0 {
        let r = -x;
        assert(r > 0) by (nonlinear_arith)
            requires x < 0, r == -x;
        r
    } else {
        x
    }
}

} // verus!
