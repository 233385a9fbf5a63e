mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::statistics::Statistics;

use common::{default_corpus, flip, Corpus};
use qdag::consistency::{check_dag, PredictionSet, RuleId, Verdict};
use qdag::decompose::{decompose, TemplateTable};
use qdag::metrics::{aggregate, pearson, Aggregate};
use qdag::program::{classify, BanList, Localizer};
use qdag::propagate::{propagate_answers, AnswerMap, Labeled, Provenance};
use qdag::scene::{execute, generate_video, support, window_for, FrameWindow, GeneratorParams};
use qdag::{parse_program, render_program, Program, Vocabulary};

fn pick(rng: &mut ChaCha8Rng, labels: &BTreeSet<String>) -> String {
    labels.iter().choose(rng).unwrap().clone()
}

fn two(rng: &mut ChaCha8Rng, labels: &BTreeSet<String>) -> (String, String) {
    let a = pick(rng, labels);
    loop {
        let b = pick(rng, labels);
        if b != a {
            return (a, b);
        }
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    v: &'a Vocabulary,
}

impl Gen<'_> {
    fn obj(&mut self) -> Program {
        Program::obj(&pick(&mut self.rng, &self.v.objects))
    }
    fn act(&mut self) -> Program {
        Program::act(&pick(&mut self.rng, &self.v.actions))
    }
    fn rel(&mut self) -> Program {
        Program::rel(&pick(&mut self.rng, &self.v.relations))
    }
    fn interaction(&mut self) -> Program {
        Program::InteractionExists {
            subject: Box::new(Program::obj("person")),
            relation: Box::new(self.rel()),
            object: Box::new(self.obj()),
        }
    }

    fn localize(&mut self, body: Program) -> Program {
        let (a, b) = two(&mut self.rng, &self.v.actions);
        match self.rng.gen_range(0..4) {
            0 => Program::localized(body, Localizer::Before, &a),
            1 => Program::localized(body, Localizer::After, &a),
            2 => Program::localized(body, Localizer::While, &a),
            _ => Program::between(body, &a, &b),
        }
    }

    fn event(&mut self) -> Program {
        let e = match self.rng.gen_range(0..4) {
            0 => self.obj(),
            1 => self.rel(),
            2 => self.act(),
            _ => self.interaction(),
        };
        if self.rng.gen_bool(0.3) {
            self.localize(e)
        } else {
            e
        }
    }

    fn object_set(&mut self) -> Program {
        let q = Program::ObjectsQuery {
            subject: Box::new(Program::obj("person")),
            relation: Box::new(self.rel()),
        };
        if self.rng.gen_bool(0.3) {
            self.localize(q)
        } else {
            q
        }
    }

    fn object_valued(&mut self) -> Program {
        let s = self.object_set();
        match self.rng.gen_range(0..3) {
            0 => Program::First(Box::new(s)),
            1 => Program::Last(Box::new(s)),
            _ => s,
        }
    }

    fn boolean(&mut self, depth: u32) -> Program {
        let top = if depth == 0 { 3 } else { 7 };
        match self.rng.gen_range(0..top) {
            0..=2 => self.event(),
            3 => Program::And(Box::new(self.boolean(depth - 1)), Box::new(self.boolean(depth - 1))),
            4 => Program::Xor(Box::new(self.boolean(depth - 1)), Box::new(self.boolean(depth - 1))),
            5 => {
                let (a, b) = two(&mut self.rng, &self.v.actions);
                if self.rng.gen_bool(0.5) {
                    Program::LongerThan(a, b)
                } else {
                    Program::ShorterThan(a, b)
                }
            }
            _ => {
                let (e1, e2) = (self.event(), self.event());
                if self.rng.gen_bool(0.5) {
                    Program::OccursBefore(Box::new(e1), Box::new(e2))
                } else {
                    Program::OccursAfter(Box::new(e1), Box::new(e2))
                }
            }
        }
    }

    fn any(&mut self, depth: u32) -> Program {
        match self.rng.gen_range(0..8) {
            0 => {
                let q = self.object_valued();
                let (a, b) = two(&mut self.rng, &self.v.objects);
                Program::ChooseObject(Box::new(Program::equals(&a, q.clone())), Box::new(Program::equals(&b, q)))
            }
            1 => {
                let (e1, e2) = (self.event(), self.event());
                Program::ChooseTime {
                    before: Box::new(Program::OccursBefore(Box::new(e1.clone()), Box::new(e2.clone()))),
                    after: Box::new(Program::OccursAfter(Box::new(e1), Box::new(e2))),
                }
            }
            2 => {
                let (a, b) = two(&mut self.rng, &self.v.actions);
                Program::LongerChoose(
                    Box::new(Program::LongerThan(a.clone(), b.clone())),
                    Box::new(Program::LongerThan(b, a)),
                )
            }
            3 => {
                let acts = if self.rng.gen_bool(0.5) {
                    self.localize(Program::ActionsQuery)
                } else {
                    Program::ActionsQuery
                };
                if self.rng.gen_bool(0.5) {
                    Program::Longest(Box::new(acts))
                } else {
                    Program::Shortest(Box::new(acts))
                }
            }
            4 => {
                let q = self.object_valued();
                Program::equals(&pick(&mut self.rng, &self.v.objects), q)
            }
            5 => self.object_valued(),
            _ => self.boolean(depth),
        }
    }
}

fn random_program(seed: u64, vocab: &Vocabulary) -> Program {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        v: vocab,
    };
    g.any(3)
}

thread_local! {
    static CORPUS: Corpus = default_corpus(3, 12);
}

fn executed_seeds(c: &Corpus, dag: &qdag::decompose::QuestionDag, keep: &[bool]) -> AnswerMap {
    let g = &c.by_video[&dag.video_id];
    dag.nodes
        .iter()
        .zip(keep.iter().cycle())
        .filter(|(_, k)| **k)
        .filter_map(|(n, _)| {
            let a = execute(&n.program, g).ok()?;
            Some((
                n.key().to_string(),
                Labeled {
                    answer: a,
                    provenance: Provenance::Executed,
                },
            ))
        })
        .collect()
}

fn answers_only(m: &AnswerMap) -> Vec<(String, String)> {
    m.iter().map(|(k, v)| (k.clone(), v.answer.to_string())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn programs_round_trip(seed in any::<u64>()) {
        let vocab = Vocabulary::builtin();
        let p = random_program(seed, &vocab);
        p.validate(&vocab).unwrap();
        let text = render_program(&p);
        let back = parse_program(&text, &vocab).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(render_program(&back), text);
        prop_assert_eq!(classify(&back), classify(&p));
    }

    #[test]
    fn decomposition_is_a_valid_dag(seed in any::<u64>()) {
        let vocab = Vocabulary::builtin();
        let p = random_program(seed, &vocab);
        let dag = decompose(&p, "v", &TemplateTable::builtin(), &BanList::default()).unwrap();
        dag.validate().unwrap();
        prop_assert_eq!(dag.nodes.len(), p.distinct_subprograms().len());
        for n in &dag.nodes {
            prop_assert!(!n.question.is_empty());
            prop_assert_eq!(n.qtype, classify(&n.program));
        }
    }

    #[test]
    fn propagation_is_sound_idempotent_and_monotone(
        pick in any::<prop::sample::Index>(),
        small in prop::collection::vec(any::<bool>(), 1..8),
        extra in prop::collection::vec(any::<bool>(), 1..8),
    ) {
        CORPUS.with(|c| {
            let dag = &c.dags[pick.index(c.dags.len())];
            let g = &c.by_video[&dag.video_id];
            let big: Vec<bool> = small.iter().zip(extra.iter().cycle()).map(|(a, b)| *a || *b).collect();
            let s_small = executed_seeds(c, dag, &small);
            let s_big = executed_seeds(c, dag, &big);
            let out_small = propagate_answers(dag, &s_small).unwrap();
            let out_big = propagate_answers(dag, &s_big).unwrap();

            for (k, l) in &out_small {
                let node = dag.nodes.iter().find(|n| n.key() == k).unwrap();
                prop_assert_eq!(Ok(l.answer.clone()), execute(&node.program, g));
                prop_assert_eq!(out_big.get(k).map(|b| &b.answer), Some(&l.answer));
            }
            let again = propagate_answers(dag, &out_small).unwrap();
            prop_assert_eq!(answers_only(&again), answers_only(&out_small));
            Ok(())
        })?;
    }

    #[test]
    fn yes_and_no_variants_never_both_pass(
        pick in any::<prop::sample::Index>(),
        seed in any::<u64>(),
    ) {
        CORPUS.with(|c| {
            let dag = &c.dags[pick.index(c.dags.len())];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pred: PredictionSet = dag
                .nodes
                .iter()
                .filter_map(|n| {
                    let g = c.gold.get(n.key())?;
                    Some((n.key().to_string(), if rng.gen_bool(0.5) { g.clone() } else { flip(g) }))
                })
                .collect();
            let checks = check_dag(dag, &pred);
            let passed: BTreeSet<(RuleId, &str)> = checks
                .iter()
                .filter(|c| c.verdict == Verdict::Pass)
                .map(|c| (c.rule_id, c.parent.as_str()))
                .collect();
            for rule in RuleId::ALL {
                let Some(partner) = RuleId::ALL.into_iter().find(|r| {
                    *r != rule && r.composition() == rule.composition()
                }) else { continue };
                for c in checks.iter().filter(|c| c.rule_id == rule) {
                    prop_assert!(
                        !(passed.contains(&(rule, c.parent.as_str())) && passed.contains(&(partner, c.parent.as_str()))),
                        "{:?} and {:?} both pass on {}", rule, partner, c.parent
                    );
                }
            }
            Ok(())
        })?;
    }

    #[test]
    fn localizer_windows_partition_the_video(seed in any::<u64>(), index in 0usize..50) {
        let vocab = Vocabulary::builtin();
        let g = generate_video(seed, index, &GeneratorParams::default(), &vocab);
        for a in &g.actions {
            let anchor = Program::act(&a.label);
            let mut covered = Vec::new();
            for l in [Localizer::Before, Localizer::While, Localizer::After] {
                covered.extend(window_for(&g, l, &anchor, None).unwrap().frames());
            }
            prop_assert_eq!(covered, (1..=g.num_frames).collect::<Vec<_>>());
        }
        prop_assert!(window_for(&g, Localizer::While, &Program::act("no such action"), None).is_none());
    }

    #[test]
    fn support_shrinks_with_the_window(seed in any::<u64>(), lo in 1u32..33, len in 0u32..33, cut in 0u32..33) {
        let vocab = Vocabulary::builtin();
        let g = generate_video(seed, 0, &GeneratorParams::default(), &vocab);
        let outer = FrameWindow::new(lo, (lo + len).min(g.num_frames));
        let inner = outer.intersect(&FrameWindow::new(lo + cut, g.num_frames));
        for r in &g.relationships {
            let p = Program::obj(&r.object);
            let big = support(&p, &g, outer);
            let small = support(&p, &g, inner);
            prop_assert!(small.is_subset(&big));
            prop_assert!(big.iter().all(|f| outer.contains(*f)));
        }
    }

    #[test]
    fn localized_yes_implies_body_yes(seed in any::<u64>(), index in 0usize..20) {
        let vocab = Vocabulary::builtin();
        let g = generate_video(seed, index, &GeneratorParams::default(), &vocab);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64);
        for _ in 0..10 {
            let mut gen = Gen { rng: rng.clone(), v: &vocab };
            let body = gen.event();
            rng = gen.rng;
            let Some(a) = g.actions.iter().choose(&mut rng) else { break };
            for l in [Localizer::Before, Localizer::While, Localizer::After] {
                let loc = Program::localized(body.clone(), l, &a.label);
                if execute(&loc, &g) == Ok(qdag::Answer::YES) {
                    prop_assert_eq!(execute(&body, &g), Ok(qdag::Answer::YES));
                }
            }
        }
    }

    #[test]
    fn pearson_matches_statrs(xs in prop::collection::vec(-100.0f64..100.0, 3..60), shift in -5.0f64..5.0) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * shift + (i % 7) as f64).collect();
        let reference = xs.clone().covariance(ys.clone()) / (xs.clone().std_dev() * ys.clone().std_dev());
        match pearson(&xs, &ys) {
            Ok(r) => {
                prop_assert!((r - reference).abs() < 1e-9, "{} vs {}", r, reference);
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            }
            Err(_) => prop_assert!(!reference.is_finite()),
        }
    }

    #[test]
    fn aggregation_is_order_independent(seed in any::<u64>()) {
        CORPUS.with(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pred: PredictionSet = c
                .gold
                .iter()
                .map(|(k, g)| (k.clone(), if rng.gen_bool(0.6) { g.clone() } else { flip(g) }))
                .collect();
            let whole = aggregate(&c.dags, &c.gold, &pred);
            let mut videos: Vec<&str> = c.graphs.iter().map(|g| g.video_id.as_str()).collect();
            for i in (1..videos.len()).rev() {
                videos.swap(i, rng.gen_range(0..=i));
            }
            let mut merged = Aggregate::default();
            for v in videos {
                let dags: Vec<_> = c.dags.iter().filter(|d| d.video_id == v).collect();
                merged.merge(&Aggregate::observe(&dags, &c.gold, &pred));
            }
            prop_assert_eq!(merged, whole);
            Ok(())
        })?;
    }
}

#[test]
fn pearson_degenerate_inputs() {
    assert_eq!(pearson(&[1.0], &[2.0]), Err("fewer than 2 points"));
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err("zero variance"));
    let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
    assert!((r + 1.0).abs() < 1e-12);
}
