from scripts import reproduce_examples


def test_worked_examples_reproduce():
    assert reproduce_examples.reproduce_two_firm_example()
    assert reproduce_examples.reproduce_three_firm_example()
    assert reproduce_examples.check_no_pure_nash()


def test_main_reports_success():
    assert reproduce_examples.main() is True
