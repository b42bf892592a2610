//! The house configuration problem: bundled encodings, an instance generator,
//! batching for incremental runs, and a direct solution checker.
//!
//! Things belong to persons and go into cabinets; cabinets go into rooms.
//! A cabinet holds at most five things and a room at most four cabinets;
//! neither may be shared between persons; and a higher-numbered cabinet may
//! not hold a lower-numbered thing than a lower-numbered cabinet.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::incremental::FactBatch;
use crate::lang::{parse_program, Atom, Program, Term};
use crate::solve::{AnswerSet, Interpretation};

pub const ENCODING: &str = include_str!("../fixtures/hcp.lp");
/// [`ENCODING`] after the constraint-aware guessing rewrite.
pub const CAG_ENCODING: &str = include_str!("../fixtures/hcp_cag.lp");
/// Two persons with two things each, two cabinets and two rooms.
pub const EXAMPLE_INSTANCE: &str = include_str!("../fixtures/hcp_example_instance.lp");

pub const CABINET_CAPACITY: usize = 5;
pub const ROOM_CAPACITY: usize = 4;

pub fn encoding() -> Program {
    parse_program(ENCODING).expect("bundled encoding parses")
}

pub fn cag_encoding() -> Program {
    parse_program(CAG_ENCODING).expect("bundled encoding parses")
}

/// The example instance facts (the listed configuration atoms excluded).
pub fn example_instance() -> Vec<Atom> {
    parse_program(EXAMPLE_INSTANCE)
        .expect("bundled instance parses")
        .facts
        .into_iter()
        .filter(|a| !matches!(&*a.predicate, "cabinetTOthing" | "roomTOcabinet"))
        .collect()
}

/// The configuration listed alongside the example instance.
pub fn example_configuration() -> AnswerSet {
    AnswerSet::new(
        parse_program(EXAMPLE_INSTANCE)
            .expect("bundled instance parses")
            .facts
            .into_iter()
            .filter(|a| matches!(&*a.predicate, "cabinetTOthing" | "roomTOcabinet")),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InstanceSpec {
    pub persons: usize,
    pub things_per_person: usize,
    pub cabinets_per_person: usize,
    pub rooms_per_person: usize,
}

impl InstanceSpec {
    pub fn new(persons: usize) -> InstanceSpec {
        InstanceSpec {
            persons,
            things_per_person: 10,
            cabinets_per_person: 2,
            rooms_per_person: 1,
        }
    }
}

fn atom(pred: &str, args: &[usize]) -> Atom {
    Atom::new(pred, args.iter().map(|&a| Term::Int(a as i64)).collect())
}

/// Instance facts, person by person. Person `p` owns the contiguous block of
/// things `(p-1)*k+1 ..= p*k`; cabinet and room ids are contiguous per person
/// in the same way.
pub fn gen_instance(spec: &InstanceSpec) -> Vec<Atom> {
    let mut out = Vec::new();
    for p in 1..=spec.persons {
        out.push(atom("person", &[p]));
        let things = (p - 1) * spec.things_per_person + 1..=p * spec.things_per_person;
        out.extend(things.clone().map(|t| atom("thing", &[t])));
        out.extend(things.map(|t| atom("personTOthing", &[p, t])));
        let cabinets = (p - 1) * spec.cabinets_per_person + 1..=p * spec.cabinets_per_person;
        out.extend(cabinets.map(|c| atom("cabinetDomain", &[c])));
        let rooms = (p - 1) * spec.rooms_per_person + 1..=p * spec.rooms_per_person;
        out.extend(rooms.map(|r| atom("roomDomain", &[r])));
    }
    out
}

/// Facts in the text format, one per line.
pub fn render_facts(facts: &[Atom]) -> String {
    facts.iter().map(|f| format!("{f}.\n")).collect()
}

fn int_args(a: &Atom) -> Option<Vec<i64>> {
    a.args
        .iter()
        .map(|t| match t {
            Term::Int(i) => Some(*i),
            _ => None,
        })
        .collect()
}

fn unary(atoms: &[Atom], pred: &str) -> BTreeSet<i64> {
    atoms
        .iter()
        .filter(|a| &*a.predicate == pred && a.arity() == 1)
        .filter_map(|a| int_args(a).map(|v| v[0]))
        .collect()
}

fn binary<'a>(atoms: impl IntoIterator<Item = &'a Atom>, pred: &str) -> BTreeSet<(i64, i64)> {
    atoms
        .into_iter()
        .filter(|a| &*a.predicate == pred && a.arity() == 2)
        .filter_map(|a| int_args(a).map(|v| (v[0], v[1])))
        .collect()
}

/// Split an instance into batches of `ppi` persons each.
///
/// Persons are taken in increasing order. Cabinet and room domain ids are
/// attributed to persons by rank: with `n` persons and `m` cabinets, the
/// `i`-th smallest cabinet id (from 0) belongs to the `i*n/m`-th person.
/// Facts of any other predicate go into the first batch.
pub fn batch_facts(instance: &[Atom], ppi: usize) -> Vec<FactBatch> {
    let ppi = ppi.max(1);
    let persons: Vec<i64> = unary(instance, "person").into_iter().collect();
    if persons.is_empty() {
        return vec![FactBatch {
            index: 1,
            facts: instance.to_vec(),
        }];
    }
    let rank: BTreeMap<i64, usize> = persons.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let owner_of_thing: BTreeMap<i64, usize> = binary(instance, "personTOthing")
        .into_iter()
        .filter_map(|(p, t)| rank.get(&p).map(|&r| (t, r)))
        .collect();
    let by_rank = |pred: &str| -> BTreeMap<i64, usize> {
        let ids: Vec<i64> = unary(instance, pred).into_iter().collect();
        let m = ids.len();
        ids.into_iter()
            .enumerate()
            .map(|(i, id)| (id, i * persons.len() / m))
            .collect()
    };
    let cabinet_owner = by_rank("cabinetDomain");
    let room_owner = by_rank("roomDomain");

    let n_batches = persons.len().div_ceil(ppi);
    let mut batches: Vec<FactBatch> = (1..=n_batches)
        .map(|index| FactBatch {
            index,
            facts: Vec::new(),
        })
        .collect();
    for a in instance {
        let first =
            |m: &BTreeMap<i64, usize>, i: usize| int_args(a).and_then(|v| v.get(i).and_then(|k| m.get(k).copied()));
        let owner = match (&*a.predicate, a.arity()) {
            ("person", 1) => first(&rank, 0),
            ("thing", 1) => first(&owner_of_thing, 0),
            ("personTOthing", 2) => first(&rank, 0),
            ("cabinetDomain", 1) => first(&cabinet_owner, 0),
            ("roomDomain", 1) => first(&room_owner, 0),
            _ => None,
        };
        let b = owner.map_or(0, |r| r / ppi);
        batches[b].facts.push(a.clone());
    }
    batches
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// Requirement 1.
    ThingUnassigned {
        thing: i64,
    },
    ThingInSeveralCabinets {
        thing: i64,
        cabinets: Vec<i64>,
    },
    /// Requirement 2.
    CabinetOverCapacity {
        cabinet: i64,
        things: usize,
    },
    /// Requirement 3.
    CabinetUnplaced {
        cabinet: i64,
    },
    CabinetInSeveralRooms {
        cabinet: i64,
        rooms: Vec<i64>,
    },
    /// Requirement 4.
    RoomOverCapacity {
        room: i64,
        cabinets: usize,
    },
    /// Requirement 5.
    CabinetShared {
        cabinet: i64,
        persons: Vec<i64>,
    },
    /// Requirement 6.
    RoomShared {
        room: i64,
        persons: Vec<i64>,
    },
    /// A higher-numbered cabinet holds a lower-numbered thing.
    Ordering {
        cabinet: i64,
        thing: i64,
        later_cabinet: i64,
        earlier_thing: i64,
    },
    /// An assignment refers to an id outside its domain or to an unused cabinet.
    OutsideDomain {
        atom: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ThingUnassigned { thing } => write!(f, "thing {thing} is in no cabinet"),
            Violation::ThingInSeveralCabinets { thing, cabinets } => {
                write!(f, "thing {thing} is in cabinets {cabinets:?}")
            }
            Violation::CabinetOverCapacity { cabinet, things } => {
                write!(f, "cabinet {cabinet} holds {things} things (max {CABINET_CAPACITY})")
            }
            Violation::CabinetUnplaced { cabinet } => write!(f, "cabinet {cabinet} is in no room"),
            Violation::CabinetInSeveralRooms { cabinet, rooms } => {
                write!(f, "cabinet {cabinet} is in rooms {rooms:?}")
            }
            Violation::RoomOverCapacity { room, cabinets } => {
                write!(f, "room {room} holds {cabinets} cabinets (max {ROOM_CAPACITY})")
            }
            Violation::CabinetShared { cabinet, persons } => {
                write!(f, "cabinet {cabinet} holds things of persons {persons:?}")
            }
            Violation::RoomShared { room, persons } => {
                write!(f, "room {room} holds things of persons {persons:?}")
            }
            Violation::Ordering {
                cabinet,
                thing,
                later_cabinet,
                earlier_thing,
            } => write!(
                f,
                "cabinet {cabinet} holds thing {thing} while cabinet {later_cabinet} holds thing {earlier_thing}"
            ),
            Violation::OutsideDomain { atom } => write!(f, "{atom} is outside the instance domains"),
        }
    }
}

/// The output part of a candidate answer set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HcpSolution {
    pub cabinet_to_thing: BTreeSet<(i64, i64)>,
    pub room_to_cabinet: BTreeSet<(i64, i64)>,
    pub used_cabinets: BTreeSet<i64>,
    pub used_rooms: BTreeSet<i64>,
}

impl HcpSolution {
    /// Project a candidate onto the output predicates. Cabinets and rooms
    /// count as used when they are asserted used or hold something.
    pub fn from_answer_set(a: &AnswerSet) -> HcpSolution {
        let atoms: Vec<Atom> = a.atoms.iter().cloned().collect();
        let cabinet_to_thing = binary(&atoms, "cabinetTOthing");
        let room_to_cabinet = binary(&atoms, "roomTOcabinet");
        let mut used_cabinets = unary(&atoms, "cabinet");
        used_cabinets.extend(cabinet_to_thing.iter().map(|&(c, _)| c));
        let mut used_rooms = unary(&atoms, "room");
        used_rooms.extend(room_to_cabinet.iter().map(|&(r, _)| r));
        HcpSolution {
            cabinet_to_thing,
            room_to_cabinet,
            used_cabinets,
            used_rooms,
        }
    }

    /// The interpretation of the encoding that this solution induces: the
    /// instance, the assignments, the derived person relations, used
    /// cabinets and rooms closed downwards within their domains, and the
    /// complementary `_n` atoms of every open choice.
    pub fn to_interpretation(&self, instance: &[Atom]) -> Interpretation {
        let things = unary(instance, "thing");
        let cabinet_domain = unary(instance, "cabinetDomain");
        let room_domain = unary(instance, "roomDomain");
        let owns = binary(instance, "personTOthing");

        let close = |used: BTreeSet<i64>, domain: &BTreeSet<i64>| -> BTreeSet<i64> {
            let top = used.iter().filter(|u| domain.contains(u)).max().copied();
            let mut out = used;
            if let Some(top) = top {
                out.extend(domain.iter().filter(|&&d| d < top));
            }
            out
        };
        let mut cabinets = self.used_cabinets.clone();
        cabinets.extend(self.cabinet_to_thing.iter().map(|&(c, _)| c));
        let cabinets = close(cabinets, &cabinet_domain);
        let mut rooms = self.used_rooms.clone();
        rooms.extend(self.room_to_cabinet.iter().map(|&(r, _)| r));
        let rooms = close(rooms, &room_domain);

        let mut atoms: BTreeSet<Atom> = instance.iter().cloned().collect();
        let pairs = |pred: &str, set: &BTreeSet<(i64, i64)>| -> Vec<Atom> {
            set.iter()
                .map(|&(a, b)| atom(pred, &[a as usize, b as usize]))
                .collect()
        };
        atoms.extend(pairs("cabinetTOthing", &self.cabinet_to_thing));
        atoms.extend(pairs("roomTOcabinet", &self.room_to_cabinet));
        atoms.extend(cabinets.iter().map(|&c| atom("cabinet", &[c as usize])));
        atoms.extend(rooms.iter().map(|&r| atom("room", &[r as usize])));
        atoms.extend(
            cabinet_domain
                .iter()
                .filter(|c| !cabinets.contains(c))
                .map(|&c| atom("cabinet_n", &[c as usize])),
        );
        atoms.extend(
            room_domain
                .iter()
                .filter(|r| !rooms.contains(r))
                .map(|&r| atom("room_n", &[r as usize])),
        );
        for &c in &cabinet_domain {
            for &t in &things {
                if !self.cabinet_to_thing.contains(&(c, t)) {
                    atoms.insert(atom("cabinetTOthing_n", &[c as usize, t as usize]));
                }
            }
        }
        for &c in &cabinets {
            for &r in &room_domain {
                if !self.room_to_cabinet.contains(&(r, c)) {
                    atoms.insert(atom("roomTOcabinet_n", &[r as usize, c as usize]));
                }
            }
        }
        let ptc: BTreeSet<(i64, i64)> = owns
            .iter()
            .flat_map(|&(p, t)| {
                self.cabinet_to_thing
                    .iter()
                    .filter(move |&&(_, t2)| t2 == t)
                    .map(move |&(c, _)| (p, c))
            })
            .collect();
        let ptr: BTreeSet<(i64, i64)> = ptc
            .iter()
            .flat_map(|&(p, c)| {
                self.room_to_cabinet
                    .iter()
                    .filter(move |&&(_, c2)| c2 == c)
                    .map(move |&(r, _)| (p, r))
            })
            .collect();
        atoms.extend(pairs("personTOcabinet", &ptc));
        atoms.extend(pairs("personTOroom", &ptr));
        Interpretation { atoms }
    }
}

/// Check a candidate against the instance by direct counting.
pub fn verify_solution(instance: &[Atom], candidate: &AnswerSet) -> Vec<Violation> {
    let sol = HcpSolution::from_answer_set(candidate);
    let things = unary(instance, "thing");
    let cabinet_domain = unary(instance, "cabinetDomain");
    let room_domain = unary(instance, "roomDomain");
    let owner: BTreeMap<i64, BTreeSet<i64>> =
        binary(instance, "personTOthing")
            .into_iter()
            .fold(BTreeMap::new(), |mut m, (p, t)| {
                m.entry(t).or_default().insert(p);
                m
            });
    let mut out = Vec::new();

    for &(c, t) in &sol.cabinet_to_thing {
        if !cabinet_domain.contains(&c) || !things.contains(&t) {
            out.push(Violation::OutsideDomain {
                atom: format!("cabinetTOthing({c},{t})"),
            });
        }
    }
    for &(r, c) in &sol.room_to_cabinet {
        if !room_domain.contains(&r) || !cabinet_domain.contains(&c) || !sol.used_cabinets.contains(&c) {
            out.push(Violation::OutsideDomain {
                atom: format!("roomTOcabinet({r},{c})"),
            });
        }
    }

    let mut cabinets_of: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    let mut things_in: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(c, t) in &sol.cabinet_to_thing {
        cabinets_of.entry(t).or_default().push(c);
        things_in.entry(c).or_default().push(t);
    }
    for &t in &things {
        match cabinets_of.get(&t).map_or(0, Vec::len) {
            0 => out.push(Violation::ThingUnassigned { thing: t }),
            1 => {}
            _ => out.push(Violation::ThingInSeveralCabinets {
                thing: t,
                cabinets: cabinets_of[&t].clone(),
            }),
        }
    }
    for (&c, ts) in &things_in {
        if ts.len() > CABINET_CAPACITY {
            out.push(Violation::CabinetOverCapacity {
                cabinet: c,
                things: ts.len(),
            });
        }
        let persons: BTreeSet<i64> = ts
            .iter()
            .flat_map(|t| owner.get(t).into_iter().flatten().copied())
            .collect();
        if persons.len() > 1 {
            out.push(Violation::CabinetShared {
                cabinet: c,
                persons: persons.into_iter().collect(),
            });
        }
    }

    let mut rooms_of: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    let mut cabinets_in: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for &(r, c) in &sol.room_to_cabinet {
        rooms_of.entry(c).or_default().push(r);
        cabinets_in.entry(r).or_default().push(c);
    }
    for &c in &sol.used_cabinets {
        match rooms_of.get(&c).map_or(0, Vec::len) {
            0 => out.push(Violation::CabinetUnplaced { cabinet: c }),
            1 => {}
            _ => out.push(Violation::CabinetInSeveralRooms {
                cabinet: c,
                rooms: rooms_of[&c].clone(),
            }),
        }
    }
    for (&r, cs) in &cabinets_in {
        if cs.len() > ROOM_CAPACITY {
            out.push(Violation::RoomOverCapacity {
                room: r,
                cabinets: cs.len(),
            });
        }
        let persons: BTreeSet<i64> = cs
            .iter()
            .flat_map(|c| things_in.get(c).into_iter().flatten())
            .flat_map(|t| owner.get(t).into_iter().flatten().copied())
            .collect();
        if persons.len() > 1 {
            out.push(Violation::RoomShared {
                room: r,
                persons: persons.into_iter().collect(),
            });
        }
    }

    for &(c1, t1) in &sol.cabinet_to_thing {
        for &(c2, t2) in &sol.cabinet_to_thing {
            if c1 < c2 && t1 > t2 {
                out.push(Violation::Ordering {
                    cabinet: c1,
                    thing: t1,
                    later_cabinet: c2,
                    earlier_thing: t2,
                });
            }
        }
    }
    out
}
