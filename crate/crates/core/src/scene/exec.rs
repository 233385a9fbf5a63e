// Closed-world program executor. Anything not annotated in the scene graph
// does not exist.

use std::collections::{BTreeMap, BTreeSet};

use super::{Frame, FrameWindow, SceneGraph};
use crate::error::ExecError;
use crate::program::{Answer, AnswerKind, Localizer, Program, TemporalToken};

type LabelFrames = BTreeMap<String, BTreeSet<Frame>>;

/// Answers `p` on `g` over the whole video.
pub fn execute(p: &Program, g: &SceneGraph) -> Result<Answer, ExecError> {
    let w = g.full_window();
    match p.answer_kind() {
        AnswerKind::Bool => eval_bool(p, g, w).map(Answer::Bool),
        AnswerKind::Temporal => eval_time(p, g, w).map(Answer::Temporal),
        AnswerKind::Label(_) => eval_label(p, g, w).map(Answer::Label),
    }
}

/// The frame window selected by a localizer, or `None` when an anchor
/// action is absent from the video.
pub fn window_for(
    g: &SceneGraph,
    localizer: Localizer,
    cond1: &Program,
    cond2: Option<&Program>,
) -> Option<FrameWindow> {
    let anchor = |p: &Program| match p {
        Program::ActionExists(a) => g.action(a),
        _ => None,
    };
    let a = anchor(cond1)?;
    let w = match localizer {
        Localizer::Before => FrameWindow::new(1, a.start.saturating_sub(1)),
        Localizer::After => FrameWindow::new(a.end + 1, g.num_frames),
        Localizer::While => FrameWindow::new(a.start, a.end),
        Localizer::Between => {
            let b = anchor(cond2?)?;
            let (earlier, later) = if (a.start, a.end) <= (b.start, b.end) {
                (a, b)
            } else {
                (b, a)
            };
            FrameWindow::new(earlier.end + 1, later.start.saturating_sub(1))
        }
    };
    Some(w)
}

/// Frames inside `w` at which the event program `p` holds.
pub fn support(p: &Program, g: &SceneGraph, w: FrameWindow) -> BTreeSet<Frame> {
    let tuple_frames = |keep: &dyn Fn(&super::Relationship) -> bool| -> BTreeSet<Frame> {
        g.relationships
            .iter()
            .filter(|r| keep(r))
            .flat_map(|r| r.frames.iter().copied())
            .filter(|&f| w.contains(f))
            .collect()
    };
    match p {
        Program::ObjExists(o) => tuple_frames(&|r| &r.subject == o || &r.object == o),
        Program::RelationExists(rel) => tuple_frames(&|r| &r.relation == rel),
        Program::InteractionExists {
            subject,
            relation,
            object,
        } => match (&**subject, &**relation, &**object) {
            (Program::ObjExists(s), Program::RelationExists(rel), Program::ObjExists(o)) => {
                tuple_frames(&|r| &r.subject == s && &r.relation == rel && &r.object == o)
            }
            _ => BTreeSet::new(),
        },
        Program::ActionExists(a) => match g.action(a) {
            Some(span) => FrameWindow::new(span.start, span.end)
                .intersect(&w)
                .frames()
                .collect(),
            None => BTreeSet::new(),
        },
        Program::Localized {
            body,
            localizer,
            cond1,
            cond2,
        } => match window_for(g, *localizer, cond1, cond2.as_deref()) {
            Some(lw) => support(body, g, w.intersect(&lw)),
            None => BTreeSet::new(),
        },
        _ => BTreeSet::new(),
    }
}

fn eval_bool(p: &Program, g: &SceneGraph, w: FrameWindow) -> Result<bool, ExecError> {
    Ok(match p {
        Program::ObjExists(_)
        | Program::RelationExists(_)
        | Program::ActionExists(_)
        | Program::InteractionExists { .. } => !support(p, g, w).is_empty(),
        Program::And(l, r) => eval_bool(l, g, w)? && eval_bool(r, g, w)?,
        Program::Xor(l, r) => eval_bool(l, g, w)? && !eval_bool(r, g, w)?,
        Program::EqualsObject { candidate, query } => {
            let answer = eval_label(query, g, w)?;
            matches!(&**candidate, Program::ObjExists(c) if *c == answer)
        }
        Program::LongerThan(a1, a2) => duration(g, a1) > duration(g, a2),
        Program::ShorterThan(a1, a2) => duration(g, a1) < duration(g, a2),
        Program::OccursBefore(e1, e2) | Program::OccursAfter(e1, e2) => {
            let first1 = support(e1, g, w).first().copied();
            let first2 = support(e2, g, w).first().copied();
            match (first1, first2) {
                (Some(f1), Some(f2)) if matches!(p, Program::OccursBefore(..)) => f1 < f2,
                (Some(f1), Some(f2)) => f1 > f2,
                _ => false,
            }
        }
        Program::Localized {
            body,
            localizer,
            cond1,
            cond2,
        } => match window_for(g, *localizer, cond1, cond2.as_deref()) {
            Some(lw) => eval_bool(body, g, w.intersect(&lw))?,
            // invalid anchor: the localized question is answered "no"
            None => false,
        },
        other => unreachable!("`{}` is not boolean", other.name()),
    })
}

fn eval_time(p: &Program, g: &SceneGraph, w: FrameWindow) -> Result<TemporalToken, ExecError> {
    match p {
        Program::ChooseTime { before, after } => {
            match (eval_bool(before, g, w)?, eval_bool(after, g, w)?) {
                (true, false) => Ok(TemporalToken::Before),
                (false, true) => Ok(TemporalToken::After),
                (b, a) => Err(ExecError::AmbiguousChoice(
                    p.to_string(),
                    usize::from(b) + usize::from(a),
                )),
            }
        }
        other => unreachable!("`{}` is not temporal", other.name()),
    }
}

fn eval_set(p: &Program, g: &SceneGraph, w: FrameWindow) -> Result<LabelFrames, ExecError> {
    let mut out = LabelFrames::new();
    match p {
        Program::ObjectsQuery { subject, relation } => {
            if let (Program::ObjExists(s), Program::RelationExists(rel)) = (&**subject, &**relation) {
                for r in &g.relationships {
                    if &r.subject == s && &r.relation == rel {
                        let frames: BTreeSet<Frame> =
                            r.frames.iter().copied().filter(|&f| w.contains(f)).collect();
                        if !frames.is_empty() {
                            out.entry(r.object.clone()).or_default().extend(frames);
                        }
                    }
                }
            }
        }
        Program::ActionsQuery => {
            for a in &g.actions {
                let frames: BTreeSet<Frame> = FrameWindow::new(a.start, a.end)
                    .intersect(&w)
                    .frames()
                    .collect();
                if !frames.is_empty() {
                    out.insert(a.label.clone(), frames);
                }
            }
        }
        Program::Localized {
            body,
            localizer,
            cond1,
            cond2,
        } => {
            let lw = window_for(g, *localizer, cond1, cond2.as_deref()).ok_or_else(|| {
                let missing = std::iter::once(&**cond1)
                    .chain(cond2.as_deref())
                    .map(anchor_label)
                    .find(|a| g.action(a).is_none())
                    .unwrap_or_default();
                ExecError::InvalidAnchor(missing.to_string())
            })?;
            return eval_set(body, g, w.intersect(&lw));
        }
        other => unreachable!("`{}` is not a set query", other.name()),
    }
    Ok(out)
}

fn anchor_label(p: &Program) -> &str {
    match p {
        Program::ActionExists(a) => a,
        _ => "",
    }
}

fn eval_label(p: &Program, g: &SceneGraph, w: FrameWindow) -> Result<String, ExecError> {
    match p {
        Program::First(body) | Program::Last(body) => {
            let set = eval_set(body, g, w)?;
            let earliest = set
                .iter()
                .map(|(label, frames)| (*frames.first().expect("non-empty"), label));
            let pick = if matches!(p, Program::First(_)) {
                earliest.min()
            } else {
                // latest first-occurrence; ties go to the smaller label
                earliest.max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            };
            pick.map(|(_, l)| l.clone())
                .ok_or_else(|| ExecError::EmptyQuery(p.to_string()))
        }
        Program::Longest(body) | Program::Shortest(body) => {
            let set = eval_set(body, g, w)?;
            let durations = set.keys().map(|l| (duration(g, l), l));
            let pick = if matches!(p, Program::Longest(_)) {
                durations.max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(a.1)))
            } else {
                durations.min()
            };
            pick.map(|(_, l)| l.clone())
                .ok_or_else(|| ExecError::EmptyQuery(p.to_string()))
        }
        Program::ChooseObject(a, b) => {
            let label = |opt: &Program| match opt {
                Program::EqualsObject { candidate, .. } => object_label(candidate).to_string(),
                _ => String::new(),
            };
            choose(p, eval_bool(a, g, w)?, eval_bool(b, g, w)?, label(a), label(b))
        }
        Program::LongerChoose(a, b) | Program::ShorterChoose(a, b) => {
            let label = |opt: &Program| match opt {
                Program::LongerThan(a1, _) | Program::ShorterThan(a1, _) => a1.clone(),
                _ => String::new(),
            };
            choose(p, eval_bool(a, g, w)?, eval_bool(b, g, w)?, label(a), label(b))
        }
        set_query => {
            let set = eval_set(set_query, g, w)?;
            let mut labels = set.into_keys();
            match (labels.next(), labels.next()) {
                (Some(l), None) => Ok(l),
                (None, _) => Err(ExecError::EmptyQuery(p.to_string())),
                (Some(_), Some(_)) => Err(ExecError::AmbiguousQuery(p.to_string())),
            }
        }
    }
}

fn object_label(p: &Program) -> &str {
    match p {
        Program::ObjExists(o) => o,
        _ => "",
    }
}

fn choose(p: &Program, a: bool, b: bool, la: String, lb: String) -> Result<String, ExecError> {
    match (a, b) {
        (true, false) => Ok(la),
        (false, true) => Ok(lb),
        _ => Err(ExecError::AmbiguousChoice(
            p.to_string(),
            usize::from(a) + usize::from(b),
        )),
    }
}

/// Full duration of an action; absent actions last zero frames.
fn duration(g: &SceneGraph, label: &str) -> u32 {
    g.action(label).map_or(0, |a| a.duration())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::fixtures::sg1;

    // Brute-force oracle: walk every frame of the video and collect the
    // objects touched at that frame.
    fn first_touched_by_frame_scan(g: &SceneGraph) -> Option<String> {
        for f in 1..=g.num_frames {
            let mut at_f: Vec<&str> = g
                .relationships
                .iter()
                .filter(|r| r.relation == "touching" && r.frames.contains(&f))
                .map(|r| r.object.as_str())
                .collect();
            at_f.sort();
            if let Some(o) = at_f.first() {
                return Some(o.to_string());
            }
        }
        None
    }

    #[test]
    fn first_object_touching() {
        let g = sg1();
        let p = Program::First(Box::new(Program::objects("person", "touching")));
        let expected = first_touched_by_frame_scan(&g).unwrap();
        assert_eq!(expected, "dish");
        assert_eq!(execute(&p, &g).unwrap(), Answer::label(&expected));
        let last = Program::Last(Box::new(Program::objects("person", "touching")));
        assert_eq!(execute(&last, &g).unwrap(), Answer::label("phone"));
    }

    #[test]
    fn phone_after_walking() {
        let g = sg1();
        let p = Program::localized(Program::obj("phone"), Localizer::After, "walking through the doorway");
        // window 5..=10 contains frame 7 of the phone tuple
        assert_eq!(window_for(&g, Localizer::After, &Program::act("walking through the doorway"), None)
            .unwrap()
            .bounds(), Some((5, 10)));
        assert_eq!(execute(&p, &g).unwrap(), Answer::YES);
        let p = Program::localized(Program::obj("phone"), Localizer::Before, "smiling at something");
        assert_eq!(execute(&p, &g).unwrap(), Answer::NO);
    }

    #[test]
    fn closed_world_absent_object() {
        assert_eq!(execute(&Program::obj("doorknob"), &sg1()).unwrap(), Answer::NO);
        assert_eq!(execute(&Program::obj("person"), &sg1()).unwrap(), Answer::YES);
    }

    #[test]
    fn invalid_anchor() {
        let g = sg1();
        let p = Program::localized(Program::obj("dish"), Localizer::Before, "sneezing");
        assert_eq!(execute(&p, &g).unwrap(), Answer::NO);
        let open = Program::localized(Program::objects("person", "touching"), Localizer::Before, "sneezing");
        assert_eq!(
            execute(&open, &g).unwrap_err(),
            ExecError::InvalidAnchor("sneezing".into())
        );
    }

    #[test]
    fn between_window_is_exclusive() {
        let g = sg1();
        let w = window_for(
            &g,
            Localizer::Between,
            &Program::act("smiling at something"),
            Some(&Program::act("walking through the doorway")),
        )
        .unwrap();
        assert_eq!(w.bounds(), Some((5, 5)));
        let p = Program::between(Program::obj("bottle"), "walking through the doorway", "smiling at something");
        assert_eq!(execute(&p, &g).unwrap(), Answer::YES);
        let p = Program::between(Program::obj("dish"), "walking through the doorway", "smiling at something");
        assert_eq!(execute(&p, &g).unwrap(), Answer::NO);
    }

    #[test]
    fn open_queries_need_a_unique_answer() {
        let g = sg1();
        assert!(matches!(
            execute(&Program::objects("person", "touching"), &g),
            Err(ExecError::AmbiguousQuery(_))
        ));
        assert_eq!(
            execute(&Program::objects("person", "holding"), &g).unwrap(),
            Answer::label("bottle")
        );
        assert!(matches!(
            execute(&Program::objects("person", "wiping"), &g),
            Err(ExecError::EmptyQuery(_))
        ));
        let loc = Program::localized(Program::objects("person", "touching"), Localizer::While, "smiling at something");
        assert_eq!(execute(&loc, &g).unwrap(), Answer::label("phone"));
    }

    #[test]
    fn durations_and_choices() {
        let g = sg1();
        // both actions last four frames; ties go to the smaller label
        assert_eq!(
            execute(&Program::Longest(Box::new(Program::ActionsQuery)), &g).unwrap(),
            Answer::label("smiling at something")
        );
        let walk = "walking through the doorway".to_string();
        let smile = "smiling at something".to_string();
        let lc = Program::LongerChoose(
            Box::new(Program::LongerThan(walk.clone(), smile.clone())),
            Box::new(Program::LongerThan(smile.clone(), walk.clone())),
        );
        assert!(matches!(execute(&lc, &g), Err(ExecError::AmbiguousChoice(_, 0))));
        let q = Program::First(Box::new(Program::objects("person", "touching")));
        let co = Program::ChooseObject(
            Box::new(Program::equals("phone", q.clone())),
            Box::new(Program::equals("dish", q)),
        );
        assert_eq!(execute(&co, &g).unwrap(), Answer::label("dish"));
    }

    #[test]
    fn temporal_ordering() {
        let g = sg1();
        let e1 = Program::interaction("person", "touching", "dish");
        let e2 = Program::interaction("person", "touching", "phone");
        let ct = Program::ChooseTime {
            before: Box::new(Program::OccursBefore(Box::new(e1.clone()), Box::new(e2.clone()))),
            after: Box::new(Program::OccursAfter(Box::new(e1), Box::new(e2))),
        };
        assert_eq!(execute(&ct, &g).unwrap(), Answer::Temporal(TemporalToken::Before));
    }

    #[test]
    fn conjunctions() {
        let g = sg1();
        let hold = Program::interaction("person", "holding", "bottle");
        let touch_cup = Program::interaction("person", "touching", "cup");
        let and = Program::And(Box::new(hold.clone()), Box::new(touch_cup.clone()));
        let xor = Program::Xor(Box::new(hold), Box::new(touch_cup));
        assert_eq!(execute(&and, &g).unwrap(), Answer::NO);
        assert_eq!(execute(&xor, &g).unwrap(), Answer::YES);
    }
}
