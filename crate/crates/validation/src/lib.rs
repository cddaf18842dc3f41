//! Hosts the `acceptance` test target; it runs after every other package in a workspace test run.
