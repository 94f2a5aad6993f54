mod surge_decay {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/surge_decay.rs"));
}

#[test]
fn surge_decay_example_runs() {
    surge_decay::run_example().expect("surge_decay example should run");
}

mod thrust_allocation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/thrust_allocation.rs"));
}

#[test]
fn thrust_allocation_example_runs() {
    thrust_allocation::run_example().expect("thrust_allocation example should run");
}

mod reference_step {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reference_step.rs"));
}

#[test]
fn reference_step_example_runs() {
    reference_step::run_example().expect("reference_step example should run");
}

mod teacher_step {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/teacher_step.rs"));
}

#[test]
fn teacher_step_example_runs() {
    teacher_step::run_example().expect("teacher_step example should run");
}

mod tune_teacher {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/tune_teacher.rs"));
}

#[test]
fn tune_teacher_example_runs() {
    tune_teacher::run_example().expect("tune_teacher example should run");
}

mod station_keeping {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/station_keeping.rs"));
}

#[test]
fn station_keeping_example_runs() {
    station_keeping::run_example().expect("station_keeping example should run");
}

mod clone_teacher {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/clone_teacher.rs"));
}

#[test]
fn clone_teacher_example_runs() {
    clone_teacher::run_example().expect("clone_teacher example should run");
}

mod scenario_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_file.rs"));
}

#[test]
fn scenario_file_example_runs() {
    scenario_file::run_example().expect("scenario_file example should run");
}

mod reproduce {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/reproduce.rs"));
}

#[test]
fn reproduce_example_runs() {
    reproduce::run_example().expect("reproduce example should run");
}
