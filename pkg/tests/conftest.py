import expfdr

# keep pytest from trying to collect the TestProblem enum as a test class
expfdr.TestProblem.__test__ = False
