//! Lowered programs run on the CFG executor behave like the syntax tree run
//! by the testkit interpreter.

use pcw_core::lang::Project;
use pcw_core::symexec::{concrete_execute, ExecError, DEFAULT_FUEL};
use pcw_testkit::interp::{interpret, InterpError};
use pcw_testkit::program_gen::random_program;
use pcw_testkit::{random_value, seeded};

#[test]
fn random_programs_agree_with_tree_interpreter() {
    let mut rng = seeded(0x10e7);
    let mut compared = 0;
    for round in 0..300 {
        let program = random_program(&mut rng);
        let project = Project::from_sources("gen", vec![("gen.mini".into(), program.source.clone())])
            .unwrap_or_else(|e| panic!("round {round}: generated program rejected: {e}\n{}", program.source));
        for qname in &program.methods {
            let id = project.resolve_method(&qname.to_string()).unwrap();
            let cfg = project.lower(&id).unwrap_or_else(|e| panic!("lowering failed: {e}\n{}", program.source));
            cfg.validate().unwrap();
            for _ in 0..8 {
                let args: Vec<_> = cfg.params.iter().map(|(_, t)| random_value(&mut rng, *t)).collect();
                let expected = interpret(&project, qname, &args, 1_000_000);
                let actual = concrete_execute(&project, &id, &args, DEFAULT_FUEL);
                match (&expected, &actual) {
                    (Ok(out), Ok(trace)) => {
                        assert!(trace.completed);
                        assert_eq!(out.returned, trace.returned, "{qname} on {args:?}\n{}", program.source);
                        let callees: Vec<String> = trace
                            .calls
                            .iter()
                            .map(|c| c.callee.as_str().rsplit('/').next().unwrap().to_string())
                            .collect();
                        let expected_callees: Vec<String> = out.calls.iter().map(|q| q.method.clone()).collect();
                        assert_eq!(expected_callees, callees, "{qname} on {args:?}\n{}", program.source);
                    }
                    (Err(InterpError::DivisionByZero), Err(ExecError::DivisionByZero(_))) => {}
                    _ => panic!("{qname} on {args:?}: {expected:?} vs {actual:?}\n{}", program.source),
                }
                compared += 1;
            }
        }
    }
    assert!(compared > 1000);
}
