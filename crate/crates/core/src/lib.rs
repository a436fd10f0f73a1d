//! Verification toolkit for the postulation of general lines plus one fat
//! line in P^3: closed-form expectations, degeneration bookkeeping, and an
//! exact rank engine over prime fields.

pub mod cli;
pub mod expected;
pub mod interp;
pub mod ledger;
pub mod schemes;
