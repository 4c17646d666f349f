//! Seeded random generation of valid specs, build documents and knowledge
//! bases, for property tests, benchmarks and the acceptance suite.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{realize_process, run_to_completion, Assignment, EngineError};
use crate::kg::KnowledgeBase;
use crate::model::{
    BehaviourSpec, BuildDocument, BuildError, BuildOutput, ConcreteBehaviour, DerivedBehaviour, EventSpec, GoalSpec,
    ProcedureSpec, ProcessSpec, Reference, RoleGrant, StateSpec, Submission, TaskSpec,
};

/// A generated document plus who performs each state of each process.
#[derive(Clone, Debug)]
pub struct GeneratedCase {
    pub document: BuildDocument,
    /// Process name → (state name, agent IRI, behaviour name) per state.
    pub performers: BTreeMap<String, Vec<(String, String, String)>>,
}

impl GeneratedCase {
    /// Resolves the performer table against a build output.
    pub fn assignments(
        &self,
        kb: &KnowledgeBase,
        output: &BuildOutput,
    ) -> Result<Vec<(String, Assignment)>, BuildError> {
        let mut out = Vec::new();
        for (process, rows) in &self.performers {
            let mut a = Assignment::new();
            for (state, agent, behaviour) in rows {
                a = a.assign(output.get(state)?.clone(), kb.resolve(agent)?, output.get(behaviour)?.clone());
            }
            out.push((process.clone(), a));
        }
        Ok(out)
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
    counter: usize,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), counter: 0 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn name(&mut self, stem: &str) -> String {
        self.counter += 1;
        format!("{stem}{}", self.counter)
    }

    pub fn reference(&mut self) -> Reference {
        let k = self.rng.gen_range(0..4);
        match self.rng.gen_range(0..3) {
            0 => Reference::exact(format!("ex:res{k}")),
            1 => Reference::new_entity(format!("ex:item{k}")),
            _ => Reference::new_instance_of(format!("ex:item{k}"), &[&format!("ex:Kind{}", self.rng.gen_range(0..3))]),
        }
    }

    pub fn task_spec(&mut self) -> TaskSpec {
        let name = self.name("task");
        let action = Reference::exact(format!("ex:action{}", self.rng.gen_range(0..5)));
        let mut t = TaskSpec::new(name, action);
        if self.rng.gen_bool(0.5) {
            t = t.argument(self.reference());
        }
        if self.rng.gen_bool(0.7) {
            t = t.object(self.reference());
        }
        for _ in 0..self.rng.gen_range(0..3) {
            t = t.input(self.reference());
        }
        for _ in 0..self.rng.gen_range(0..3) {
            t = t.output(self.reference());
        }
        t
    }

    /// Each item may depend on a random subset of earlier ones, so the
    /// dependency relation is acyclic by construction.
    fn dependencies(&mut self, names: &[String]) -> Vec<Vec<String>> {
        (0..names.len()).map(|i| names[..i].iter().filter(|_| self.rng.gen_bool(0.3)).cloned().collect()).collect()
    }

    pub fn behaviour_spec(&mut self) -> BehaviourSpec {
        let name = self.name("behaviour");
        let mut goals = Vec::new();
        for _ in 0..self.rng.gen_range(1..=2) {
            let gname = self.name("goal");
            let mut tasks: Vec<TaskSpec> = (0..self.rng.gen_range(1..=3)).map(|_| self.task_spec()).collect();
            let names: Vec<String> = tasks.iter().map(|t| t.name.clone()).collect();
            for (t, deps) in tasks.iter_mut().zip(self.dependencies(&names)) {
                t.depends_on = deps;
            }
            goals.push(GoalSpec::new(gname, tasks));
        }
        let names: Vec<String> = goals.iter().map(|g| g.name.clone()).collect();
        for (g, deps) in goals.iter_mut().zip(self.dependencies(&names)) {
            g.depends_on = deps;
        }
        BehaviourSpec::new(name, goals)
    }

    /// Same shape and references as `spec`, with fresh names throughout.
    pub fn renamed(&mut self, spec: &BehaviourSpec, stem: &str) -> BehaviourSpec {
        let mut out = spec.clone();
        out.name = self.name(stem);
        let goal_names: BTreeMap<String, String> =
            spec.goals.iter().map(|g| (g.name.clone(), self.name(&format!("{stem}Goal")))).collect();
        for goal in &mut out.goals {
            let task_names: BTreeMap<String, String> =
                goal.tasks.iter().map(|t| (t.name.clone(), self.name(&format!("{stem}Task")))).collect();
            goal.name = goal_names[&goal.name].clone();
            goal.depends_on = goal.depends_on.iter().map(|d| goal_names[d].clone()).collect();
            for task in &mut goal.tasks {
                task.name = task_names[&task.name].clone();
                task.depends_on = task.depends_on.iter().map(|d| task_names[d].clone()).collect();
            }
        }
        out
    }

    pub fn event_spec(&mut self) -> EventSpec {
        let name = self.name("event");
        let mut e = EventSpec::new(name, self.task_spec());
        if self.rng.gen_bool(0.5) {
            e.kind = Some(["foreseen", "incidental"][self.rng.gen_range(0..2)].to_string());
        }
        if self.rng.gen_bool(0.3) {
            e.duration = Some(format!("PT{}S", self.rng.gen_range(1..60)));
        }
        e
    }

    /// A process over `plans`, split into one or two procedures.
    pub fn process_spec(&mut self, plans: Vec<BehaviourSpec>) -> ProcessSpec {
        let name = self.name("process");
        let split =
            if plans.len() > 1 && self.rng.gen_bool(0.4) { self.rng.gen_range(1..plans.len()) } else { plans.len() };
        let mut procedures = Vec::new();
        for chunk in [&plans[..split], &plans[split..]] {
            if chunk.is_empty() {
                continue;
            }
            let pname = self.name("procedure");
            let mut states = Vec::new();
            for plan in chunk {
                let mut s = StateSpec::new(self.name("state"), plan.clone());
                if self.rng.gen_bool(0.3) {
                    s = s.event(self.event_spec());
                }
                states.push(s);
            }
            procedures.push(ProcedureSpec { name: pname, states });
        }
        ProcessSpec { name, procedures }
    }

    /// A random but valid modelling session: agents, templates, derived and
    /// concrete behaviours, roles, processes with submitted plans, and a
    /// capable performer for every state.
    pub fn case(&mut self) -> GeneratedCase {
        let agents: Vec<String> =
            (0..self.rng.gen_range(1..=3)).map(|_| format!("ex:{}", self.name("agent"))).collect();
        let templates: Vec<BehaviourSpec> = (0..self.rng.gen_range(1..=2)).map(|_| self.behaviour_spec()).collect();

        // (behaviour name, its shape, agents able to exhibit it)
        let mut behaviours: Vec<(String, BehaviourSpec, Vec<String>)> = Vec::new();
        let mut derived = Vec::new();
        for t in &templates {
            for _ in 0..self.rng.gen_range(1..=2) {
                let name = self.name("derived");
                let owner = self.rng.gen_bool(0.5).then(|| agents.choose(&mut self.rng).expect("agents").clone());
                derived.push(DerivedBehaviour { name: name.clone(), template: t.name.clone(), owner: owner.clone() });
                behaviours.push((name, t.clone(), owner.into_iter().collect()));
            }
        }
        let mut concrete = Vec::new();
        for _ in 0..self.rng.gen_range(0..=2) {
            let spec = self.behaviour_spec();
            let owner = self.rng.gen_bool(0.5).then(|| agents.choose(&mut self.rng).expect("agents").clone());
            behaviours.push((spec.name.clone(), spec.clone(), owner.clone().into_iter().collect()));
            concrete.push(ConcreteBehaviour { spec, owner });
        }
        // Every behaviour without an owner is provided by some role.
        let mut roles: Vec<RoleGrant> = Vec::new();
        for (name, _, capable) in behaviours.iter_mut() {
            if capable.is_empty() || self.rng.gen_bool(0.3) {
                let agent = agents.choose(&mut self.rng).expect("agents").clone();
                match roles.iter_mut().find(|r| r.agent == agent) {
                    Some(r) => r.behaviours.push(name.clone()),
                    None => roles.push(RoleGrant {
                        agent: agent.clone(),
                        role_type: format!("ex:roleType{}", self.rng.gen_range(0..3)),
                        behaviours: vec![name.clone()],
                        deprecated: false,
                    }),
                }
                if !capable.contains(&agent) {
                    capable.push(agent);
                }
            }
        }

        let mut processes = Vec::new();
        let mut submissions = Vec::new();
        let mut performers = BTreeMap::new();
        for _ in 0..self.rng.gen_range(1..=2) {
            let mut plans = Vec::new();
            let mut picks = Vec::new();
            for _ in 0..self.rng.gen_range(1..=4) {
                let (bname, shape, capable) = behaviours.choose(&mut self.rng).expect("behaviours").clone();
                let plan = self.renamed(&shape, "plan");
                submissions.push(Submission { plan: plan.name.clone(), behaviour: bname.clone() });
                picks.push((bname, capable.choose(&mut self.rng).expect("capable agent").clone()));
                plans.push(plan);
            }
            let process = self.process_spec(plans);
            let states = process.procedures.iter().flat_map(|p| p.states.iter().map(|s| s.name.clone()));
            let rows = states.zip(picks).map(|(s, (b, a))| (s, a, b)).collect();
            performers.insert(process.name.clone(), rows);
            processes.push(process);
        }

        GeneratedCase {
            document: BuildDocument {
                agents,
                templates,
                derived,
                behaviours: concrete,
                plans: Vec::new(),
                roles,
                processes,
                submissions,
            },
            performers,
        }
    }
}

/// Builds a generated case and, with `execute`, realizes and runs every
/// process in it.
pub fn random_kb(seed: u64, execute: bool) -> Result<KnowledgeBase, EngineError> {
    let case = Generator::new(seed).case();
    let mut kb = KnowledgeBase::new();
    let output = case.document.apply(&mut kb).expect("generated documents are valid");
    if execute {
        for (process, assignment) in case.assignments(&kb, &output).expect("generated names resolve") {
            let root = output.get(&process).expect("process built").clone();
            let mut handle = realize_process(&mut kb, &root, &assignment)?;
            run_to_completion(&mut kb, &mut handle)?;
        }
    }
    Ok(kb)
}
