//! The two case-study nets, built in code. The same nets ship as PNML and
//! textual files under `models/`.

use crate::net::{NetBuilder, PetriNet};

/// Unbounded process scheduler: new (p0), runnable (p1), running (p2),
/// blocked (p3), terminated (p4).
pub fn ups() -> PetriNet {
    let mut b = NetBuilder::new();
    for p in ["p0", "p1", "p2", "p3", "p4"] {
        b.place(p, 0).expect("fresh name");
    }
    for t in ["t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7"] {
        b.transition(t).expect("fresh name");
    }
    let arcs = [
        ("t0", "p0"),
        ("p0", "t1"),
        ("t1", "p1"),
        ("p1", "t2"),
        ("t2", "p2"),
        ("p2", "t3"),
        ("t3", "p1"),
        ("p2", "t4"),
        ("t4", "p3"),
        ("p3", "t5"),
        ("t5", "p1"),
        ("p2", "t6"),
        ("t6", "p4"),
        ("p4", "t7"),
    ];
    for (s, d) in arcs {
        b.arc(s, d, 1).expect("valid arc");
    }
    b.build().expect("valid net")
}

/// Autonomous parking system. Server places p1 (ready), p7 (busy) and
/// p8 (rejected) always hold exactly one token between them.
pub fn aps() -> PetriNet {
    let mut b = NetBuilder::new();
    for (i, p) in ["p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"]
        .into_iter()
        .enumerate()
    {
        b.place(p, u64::from(i == 1)).expect("fresh name");
    }
    for t in ["t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7"] {
        b.transition(t).expect("fresh name");
    }
    let arcs = [
        ("t0", "p0"),
        ("p0", "t1"),
        ("p1", "t1"),
        ("t1", "p3"),
        ("t1", "p7"),
        ("p3", "t2"),
        ("t2", "p2"),
        ("p2", "t3"),
        ("t3", "p4"),
        ("t3", "p5"),
        ("p0", "t4"),
        ("p1", "t4"),
        ("t4", "p6"),
        ("t4", "p8"),
        ("p4", "t5"),
        ("p5", "t6"),
        ("p7", "t6"),
        ("t6", "p1"),
        ("p8", "t7"),
        ("t7", "p1"),
    ];
    for (s, d) in arcs {
        b.arc(s, d, 1).expect("valid arc");
    }
    b.build().expect("valid net")
}
