use vstd::prelude::*;

verus! {

fn replace_last(first: &Vec<i32>, second: &Vec<i32>) -> (replaced_list: Vec<i32>)
    requires
        first.len() > 0,
    ensures
        replaced_list@ == first@.subrange(0, first.len() - 1).add(second@),
{
    let mut replaced_list: Vec<i32> = Vec::new();
    let first_end = first.len() - 1;
    let mut index = 0;
    while index < first_end
        invariant
            first_end == first.len() - 1,
            0 <= index <= first_end,
            replaced_list@ == first@.subrange(0, index as int),
    {
        replaced_list.push(first[index]);
        index += 1;
    }
    assert(replaced_list@ == first@.subrange(0, first_end as int));
    assert(second@.subrange(0, 0) =~= Seq::<i32>::empty());
    assert(replaced_list@ == first@.subrange(0, first_end as int).add(second@.subrange(0, 0)));
    let ghost prefix = first@.subrange(0, first_end as int);
    proof {
        assert(prefix.add(second@.subrange(0, 0)) =~= prefix);
        assert(replaced_list@ == prefix);
    }
    let ghost first_part = replaced_list@;

    // Append every element of `second`, keeping the prefix intact.
    let second_len = second.len();
    assert(first_part == prefix);
    index = 0;
    while index < second.len()
        invariant
            0 <= index <= second.len(),
            first_end == first.len() - 1,
            replaced_list@ == first@.subrange(0, first_end as int).add(second@.subrange(0, index as int)),
            second_len == second.len(),
    {
        replaced_list.push(second[index]);
        index += 1;
    }
    assert(index == second.len());
    assert(0 <= index <= second@.len());
    assert(second@.subrange(0, index as int) == second@) by {
        lemma_subrange_all(second@);
    }
    assert(replaced_list@ == first@.subrange(0, first_end as int)
        .add(second@.subrange(0, second@.len() as int)));

    proof {
        let whole = second@.subrange(0, second@.len() as int);
        assert(whole =~= second@);
        // the postcondition is the previous assertion with `whole` folded in
        lemma_subrange_all(second@);
        assert(replaced_list@ =~= first@.subrange(0, first.len() - 1).add(second@));
    }
    replaced_list
}

proof fn lemma_subrange_all<T>(s: Seq<T>)
    ensures
        s.subrange(0, s.len() as int) == s,
{
    assert(s.subrange(0, s.len() as int) =~= s);
}

} // verus!
