use vstd::prelude::*;

verus! {

proof fn lemma_max_upper_bound(v: Seq<i64>, m: int, k: int)
    requires
        0 <= k < v.len(),
        forall|j: int| 0 <= j < k ==> v[j] <= m,
        v[k] <= m,
    ensures
        forall|j: int| 0 <= j <= k ==> v[j] <= m,
{
}

fn max_index(v: &Vec<i64>) -> (best: usize)
    requires
        v.len() > 0,
    ensures
        best < v.len(),
        forall|j: int| 0 <= j < v.len() ==> v[j] <= v[best as int],
{
    let mut best: usize = 0;
    let mut i: usize = 1;
    while i < v.len()
        invariant
            1 <= i <= v.len(),
            best < i,
            forall|j: int| 0 <= j < i ==> v[j] <= v[best as int],
    {
        if v[i] > v[best] {
            best = i;
        }
        proof {
            lemma_max_upper_bound(v@, v[best as int] as int, i as int);
        }
        i += 1;
    }
    best
}

} // verus!
