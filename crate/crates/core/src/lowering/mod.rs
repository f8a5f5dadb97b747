//! Typed tree to bytecode.

pub mod bytecode;
pub mod free_vars;
mod lower;

pub use bytecode::{
    Block, BlockLabel, BytecodeModule, Instruction, JumpKind, JumpTarget, Slot, StackEffect, ValidationError,
};
pub use free_vars::{free_names, free_variables};
pub use lower::{lower_program, LowerOptions, LoweringError};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{compile, compile_with};

    fn module(src: &str) -> BytecodeModule {
        (*compile(src, "t.cup").unwrap().module).clone()
    }

    fn opcodes(m: &BytecodeModule) -> Vec<&'static str> {
        m.blocks.iter().flat_map(|b| b.instrs.iter().map(|i| i.opcode())).collect()
    }

    /// Position of `needle` as a contiguous run inside `hay`.
    fn find_run(hay: &[&str], needle: &[&str]) -> Option<usize> {
        hay.windows(needle.len()).position(|w| w == needle)
    }

    #[test]
    fn call_site_follows_convention() {
        let m = module("f <- function (x) { x + 1 };\n{ y <- 2; f(y) }");
        let ops = opcodes(&m);
        let call = [
            "StoreLocal",
            "StoreLocal",
            "PushLocal",
            "StackPush",
            "PushEnv",
            "PushLocal",
            "JumpIndirect",
        ];
        assert!(find_run(&ops, &call).is_some(), "{}", m.dump());
        let prologue = ["StoreLocal", "StoreLocal", "PushLocal", "StoreLocal"];
        let f_entry = m.blocks.iter().find(|b| b.name == "fn").unwrap();
        let f_ops: Vec<_> = f_entry.instrs.iter().map(|i| i.opcode()).collect();
        assert_eq!(&f_ops[..4], &prologue);
    }

    #[test]
    fn reset_and_shift_emit_protocol() {
        let m = module("reset(1 + shift(k, k(2)))");
        let ops = opcodes(&m);
        assert!(find_run(&ops, &["StackPush", "ResetStackPush"]).is_some());
        assert!(find_run(&ops, &["ResetStackPeek", "StackSaveToBoundary", "MakeContinuation"]).is_some());
        let resume = m.blocks.iter().find(|b| b.name == "resume").unwrap();
        assert_eq!(resume.instrs[0], Instruction::StoreLocal(bytecode::S0));
        let resume_ops: Vec<_> = resume.instrs.iter().map(|i| i.opcode()).collect();
        assert_eq!(
            &resume_ops[..6],
            &["StoreLocal", "StoreLocal", "StackPush", "ResetStackPush", "PushLocal", "StackRestore"]
        );
        let exit = m.blocks.iter().find(|b| b.name == "reset-exit").unwrap();
        assert_eq!(exit.instrs[1], Instruction::ResetStackPop);
    }

    #[test]
    fn lowering_is_deterministic() {
        let src = "type L : (+ (C : (int, L)) (N : unit));\n\
                   len <- function (l) { case l { C (h, t) => 1 + len(t); N => 0 } };\n\
                   map(function (x) { x * 2 }, [1, 2, 3])";
        let a = compile(src, "t.cup").unwrap();
        let b = compile(src, "t.cup").unwrap();
        assert_eq!(a.module.dump(), b.module.dump());
        assert_eq!(*a.module, *b.module);
    }

    #[test]
    fn builtins_are_not_captured() {
        let m = module("model <- function () { repeat(function (i) { sample*(normal(0.0, 10.0)) }, 3) };\n()");
        for b in &m.blocks {
            for i in &b.instrs {
                if let Instruction::MakeClosure(_, slots) = i {
                    assert!(slots.is_empty(), "{}", m.dump());
                }
            }
        }
    }

    #[test]
    fn captured_slots_follow_free_variable_order() {
        let m = module("{ a <- 1; b <- 2; f <- function (x) { b + a + x }; f(0) }");
        let captures: Vec<_> = m
            .blocks
            .iter()
            .flat_map(|b| b.instrs.iter())
            .filter_map(|i| match i {
                Instruction::MakeClosure(_, s) if !s.is_empty() => Some(s.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(captures, vec![vec![3, 2]]);
    }

    #[test]
    fn live_only_saves_fewer_registers() {
        let src = "f <- function (x) { x };\n{ a <- 1; b <- f(a); c <- f(b); c }";
        let full = compile(src, "t.cup").unwrap();
        let live = compile_with(src, "t.cup", &LowerOptions { live_only: true }).unwrap();
        assert!(live.module.instruction_count() < full.module.instruction_count());
    }

    #[test]
    fn dump_format() {
        let m = module("1 + 2");
        for line in m.dump().lines() {
            let (label, rest) = line.split_once(": ").unwrap();
            assert!(label.starts_with('L') && label[1..].parse::<u32>().is_ok());
            assert!(rest.chars().next().unwrap().is_ascii_uppercase());
        }
        assert!(m.dump().contains("Binary +"));
    }

    #[test]
    fn every_block_validates() {
        let m = module("filter(function (x) { x % 2 == 0 }, [1, 2, 3, 4])");
        m.validate().unwrap();
        for b in &m.blocks {
            assert!(b.instrs.last().unwrap().is_terminator());
        }
    }

    #[test]
    fn stack_effects_are_declared() {
        assert_eq!(Instruction::MakeTuple(3).stack_effect().pops, 3);
        assert!(Instruction::StackSaveToBoundary.stack_effect().variable);
        assert_eq!(Instruction::Halt.stack_effect(), StackEffect { pops: 0, pushes: 0, variable: false });
    }
}
